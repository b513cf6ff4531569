"""
Hjortic Library - configuration, logging and artifact writers

Usage:
from hjortic_lib import load_config, setup_logging

config = load_config("config/config.json")
setup_logging(config)
"""

import json
import logging
import math
import os
from dataclasses import asdict, dataclass, fields
from typing import Any, Dict, Iterable, List, Optional, Sequence

import numpy as np
import pandas as pd

from tsmodel.parallel import THREADS_ENV, set_thread_count

DEFAULT_CONFIG_PATH = os.path.join("config", "config.json")
LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
SIGNIFICANT_DIGITS = 12


@dataclass
class HjorticConfig:
    """Configuration for hjortic runs"""
    log_level: str = "INFO"
    log_file: Optional[str] = "hjortic.log"
    threads: int = 1
    seed: int = 0
    output_dir: str = "out"
    significant_digits: int = SIGNIFICANT_DIGITS
    ar_order: int = 1
    include_trend: bool = False
    monitor_naive_window: int = 3
    rolling_bandwidth: float = 10.0
    adf_max_lag: Optional[int] = None
    tvar_bandwidth: float = 0.15
    copula_n_fish: int = 1000
    copula_n_reps: int = 5000
    cd_level: float = 0.95
    fic_max_candidates: int = 256

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


# config.json group -> {json key: HjorticConfig field}
_CONFIG_KEYS = {
    "logging": {"level": "log_level", "file": "log_file"},
    "runtime": {"threads": "threads", "seed": "seed"},
    "output": {"dir": "output_dir", "significant_digits": "significant_digits"},
    "fit": {"ar_order": "ar_order", "include_trend": "include_trend"},
    "monitor": {"naive_window": "monitor_naive_window", "rolling_bandwidth": "rolling_bandwidth",
                "adf_max_lag": "adf_max_lag"},
    "tvar": {"bandwidth": "tvar_bandwidth"},
    "copula": {"n_fish": "copula_n_fish", "n_reps": "copula_n_reps"},
    "confid": {"level": "cd_level"},
    "fic": {"max_candidates": "fic_max_candidates"},
}


def load_config(path: Optional[str] = None) -> HjorticConfig:
    """
    Load configuration from config.json, falling back to defaults.

    Args:
        path: Config file path (default config/config.json)

    Returns:
        HjorticConfig with file values applied and HJORTIC_THREADS honored
    """
    config = HjorticConfig()
    path = path or DEFAULT_CONFIG_PATH
    try:
        with open(path, "r", encoding="utf-8") as f:
            raw = json.load(f)
    except FileNotFoundError:
        logging.debug(f"Config file {path} not found, using defaults")
        raw = {}
    except json.JSONDecodeError as e:
        raise ValueError(f"Invalid config file {path}: {e}") from e

    known = {f.name for f in fields(HjorticConfig)}
    for group, values in raw.items():
        mapping = _CONFIG_KEYS.get(group)
        if mapping is None or not isinstance(values, dict):
            logging.warning(f"Ignoring unknown config group '{group}'")
            continue
        for key, value in values.items():
            name = mapping.get(key)
            if name is None or name not in known:
                logging.warning(f"Ignoring unknown config key '{group}.{key}'")
                continue
            setattr(config, name, value)

    env = os.environ.get(THREADS_ENV)
    if env and env.isdigit() and int(env) >= 1:
        config.threads = int(env)
    return config


def setup_logging(config: HjorticConfig, verbose: bool = False, log_to_file: bool = True):
    """Setup logging configuration."""
    level = logging.DEBUG if verbose else getattr(logging, str(config.log_level).upper(), logging.INFO)
    handlers: List[logging.Handler] = [logging.StreamHandler()]
    if log_to_file and config.log_file:
        handlers.insert(0, logging.FileHandler(config.log_file, encoding="utf-8"))
    logging.basicConfig(level=level, format=LOG_FORMAT, handlers=handlers, force=True)


def apply_runtime(config: HjorticConfig):
    """Push runtime settings (worker count) into the engine."""
    set_thread_count(max(1, int(config.threads)))


def round_floats(obj: Any, digits: int = SIGNIFICANT_DIGITS) -> Any:
    """Recursively round floats to `digits` significant digits; NaN and inf become None."""
    if isinstance(obj, dict):
        return {str(k): round_floats(v, digits) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [round_floats(v, digits) for v in obj]
    if isinstance(obj, np.ndarray):
        return round_floats(obj.tolist(), digits)
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        value = float(obj)
        if not math.isfinite(value):
            return None
        return float(format(value, f".{digits}g"))
    return obj


def write_json(path: str, payload: Dict[str, Any], digits: int = SIGNIFICANT_DIGITS):
    """Write a JSON artifact with fixed float formatting."""
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(round_floats(payload, digits), f, indent=2, ensure_ascii=False)
        f.write("\n")
    logging.info(f"Wrote {path}")


def write_rows(path: str, header: Sequence[str], rows: Iterable[Sequence[Any]],
               digits: int = SIGNIFICANT_DIGITS):
    """Write plot-ready CSV rows; missing values are written as NA."""
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    table = pd.DataFrame(list(rows), columns=list(header))
    table.to_csv(path, index=False, float_format=f"%.{digits}g", na_rep="NA", encoding="utf-8")
    logging.info(f"Wrote {path} ({len(table)} rows)")
