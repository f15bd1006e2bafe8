"""
Deterministic report files.

Reports are written as UTF-8 JSON with sorted keys and a fixed float
format, and carry no timestamps, so the same run writes the same bytes.
"""
import hashlib
import json
import math
from pathlib import Path
from typing import Dict, Optional

import numpy as np

FLOAT_FORMAT = ".15g"


def normalize(obj):
    """Plain JSON types; floats in the fixed format, non-finite floats as strings."""
    if isinstance(obj, dict):
        return {str(k): normalize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [normalize(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return normalize(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return float(format(x, FLOAT_FORMAT))
    return obj


def dump_report(payload: Dict) -> bytes:
    text = json.dumps(normalize(payload), sort_keys=True, indent=2, ensure_ascii=False, allow_nan=False)
    return (text + "\n").encode("utf-8")


def report_digest(payload: Dict) -> str:
    return hashlib.sha256(dump_report(payload)).hexdigest()


def save_reports(path, payload: Dict) -> Optional[str]:
    """
    Write a report file.

    Returns:
        str: SHA-256 hex digest of the written bytes, or None on failure
    """
    try:
        path = Path(path)
        data = dump_report(payload)
        if path.parent and not path.parent.exists():
            path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, 'wb') as f:
            f.write(data)
        digest = hashlib.sha256(data).hexdigest()
        print(f"[OK] Report saved to {path} (sha256 {digest[:12]})")
        return digest
    except Exception as e:
        print(f"[!] Could not save report {path}: {e}")
        return None


def load_report(path) -> Dict:
    """Load a saved report; an empty dict when missing or unreadable."""
    try:
        path = Path(path)
        if path.exists():
            with open(path, 'r', encoding='utf-8') as f:
                return json.load(f)
    except Exception as e:
        print(f"[!] Could not load report {path}: {e}")
    return {}
