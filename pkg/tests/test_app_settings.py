"""
Run defaults: loading, merging partial files and saving tolerances.
"""
import json

from config.app_settings import (
    DEFAULT_SETTINGS,
    get_run_settings,
    get_sample_settings,
    get_tolerance_settings,
    load_settings,
    save_settings,
    save_tolerance_settings,
)


class TestSettings:
    def test_missing_file_gives_defaults(self, tmp_path):
        settings = load_settings(tmp_path / "none.json")
        assert settings == DEFAULT_SETTINGS
        settings["run"]["seed"] = 1
        assert DEFAULT_SETTINGS["run"]["seed"] == 42

    def test_partial_file_is_merged(self, tmp_path):
        path = tmp_path / "settings.json"
        path.write_text(json.dumps({"run": {"seed": 7}, "samples": {"oracle": 5}}), encoding="utf-8")
        assert get_run_settings(path) == {"seed": 7, "output_dir": "reports"}
        assert get_sample_settings(path)["oracle"] == 5
        assert get_sample_settings(path)["lc1"] == 500
        assert get_tolerance_settings(path) == DEFAULT_SETTINGS["tolerances"]

    def test_corrupt_file_warns(self, tmp_path, capsys):
        path = tmp_path / "settings.json"
        path.write_text("[1, 2", encoding="utf-8")
        assert load_settings(path) == DEFAULT_SETTINGS
        assert "[WARNING]" in capsys.readouterr().out

    def test_save_round_trip(self, tmp_path):
        path = tmp_path / "settings.json"
        assert save_settings({"run": {"seed": 3, "output_dir": "out"}}, path)
        assert get_run_settings(path)["output_dir"] == "out"
        assert save_tolerance_settings({"identity": 1e-6, "convexity": 1e-6, "lc1": 1e-6}, path)
        assert get_tolerance_settings(path)["identity"] == 1e-6
        assert get_run_settings(path)["seed"] == 3

    def test_bundled_file_matches_defaults(self):
        assert load_settings() == DEFAULT_SETTINGS
