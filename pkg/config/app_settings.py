"""
Run defaults persistence for dcforge.
Stores the seed, output directory, check tolerances and sample counts locally.
"""
import copy
import json
from pathlib import Path

SETTINGS_FILE = Path(__file__).parent / "app_settings.json"

DEFAULT_SETTINGS = {
    "run": {
        "seed": 42,
        "output_dir": "reports"
    },
    "tolerances": {
        "identity": 1e-7,
        "convexity": 1e-8,
        "lc1": 1e-8
    },
    "samples": {
        "convexity": 1000,
        "identity": 1000,
        "lc1": 500,
        "oracle": 20
    }
}


def load_settings(path=None):
    """Load settings from file, falling back to the defaults."""
    path = Path(path) if path else SETTINGS_FILE
    try:
        if path.exists():
            with open(path, 'r', encoding='utf-8') as f:
                return json.load(f)
    except Exception as e:
        print(f"[WARNING] Could not load settings: {e}")

    return copy.deepcopy(DEFAULT_SETTINGS)


def save_settings(settings, path=None):
    """Save settings to file."""
    path = Path(path) if path else SETTINGS_FILE
    try:
        with open(path, 'w', encoding='utf-8') as f:
            json.dump(settings, f, indent=2)
        print("[OK] Settings saved")
        return True
    except Exception as e:
        print(f"[ERROR] Could not save settings: {e}")
        return False


def _section(name, path=None):
    settings = load_settings(path)
    merged = dict(DEFAULT_SETTINGS[name])
    section = settings.get(name, {})
    if isinstance(section, dict):
        merged.update(section)
    return merged


def get_run_settings(path=None):
    """Get run settings (seed, output directory)."""
    return _section("run", path)


def get_tolerance_settings(path=None):
    """Get check tolerances."""
    return _section("tolerances", path)


def get_sample_settings(path=None):
    """Get sample counts."""
    return _section("samples", path)


def save_tolerance_settings(tolerances, path=None):
    """Save check tolerances."""
    settings = load_settings(path)
    settings["tolerances"] = tolerances
    return save_settings(settings, path)
