"""Pipeline configuration: defaults, TOML loading with unknown-key
rejection, and the resolved-config sidecar written next to every output."""

from __future__ import annotations

import copy
import os

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .errors import DataError

DEFAULTS: dict = {
    "general": {"seed": 0, "workers": 1},
    "gtc": {"cube": [3, 3, 9]},
    "got": {"scales": [9, 13, 17],
            "weights": [1 / 3, 1 / 3, 1 / 3],
            "axes": ["t", "x", "y"]},
    "glcm": {"levels": 16, "offsets": [[0, 1], [1, 0], [1, 1], [1, -1]]},
    "fault": {"percentile": 90.0, "d_chain": 10.0},
    "hough": {"rho_res": 1.0, "theta_res_deg": 1.0, "theta_range_deg": 30.0,
              "min_support": 10, "max_gap": 3.0, "min_length": 8.0},
    "prune": {"d_merge": 5.0, "theta_merge_deg": 5.0},
    "fault_track": {"block": 9, "search": 4, "max_ref_distance": 10},
    "salt": {"theta_rel": 0.5, "n_patch": 11, "n_group": 2,
             "reduced_dims": [4, 4, 3], "search": 5},
    "features": {"n_scales": 3, "n_orientations": 4, "top_singular": 3,
                 "include_glcm": False},
    "slic": {"n_segments": 64, "compactness": 10.0},
    "nmf": {"n_features_per_class": 8, "rho_w": 0.85, "lambda1": 0.1,
            "lambda2": 0.1, "gamma1": 1.0, "max_iter": 300, "tol": 1e-5},
}


def load_config(path: str | None) -> dict:
    """Defaults overlaid with a TOML file; unknown tables/keys are errors."""
    config = copy.deepcopy(DEFAULTS)
    if path is None:
        return config
    with open(path, "rb") as f:
        user = tomllib.load(f)
    for table, values in user.items():
        if table not in config:
            raise DataError(f"unknown config table [{table}]")
        if not isinstance(values, dict):
            raise DataError(f"top-level key {table!r} must be a table")
        for key, value in values.items():
            if key not in config[table]:
                raise DataError(f"unknown config key {table}.{key}")
            config[table][key] = value
    return config


def _toml_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, float)):
        return repr(v)
    if isinstance(v, str):
        return '"' + v.replace("\\", "\\\\").replace('"', '\\"') + '"'
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_toml_value(x) for x in v) + "]"
    raise DataError(f"cannot serialize config value {v!r}")


def dump_config(config: dict) -> str:
    lines = []
    for table in sorted(config):
        lines.append(f"[{table}]")
        for key in sorted(config[table]):
            lines.append(f"{key} = {_toml_value(config[table][key])}")
        lines.append("")
    return "\n".join(lines)


def write_sidecar(out_path: str, config: dict) -> None:
    """Echo the fully-resolved config beside an output for reproducibility."""
    sidecar = str(out_path) + ".config.toml"
    os.makedirs(os.path.dirname(os.path.abspath(sidecar)), exist_ok=True)
    with open(sidecar, "w") as f:
        f.write(dump_config(config))
