"""
Input validation and configuration loading for the SLQ toolkit
Keeps malformed numbers, spec strings and config files out of the numerics
"""
import copy
import json
import logging
import math
import numbers
import os
import re
from pathlib import Path
from typing import Any, Dict, Optional, Union

from errors import InvalidInputError, MalformedInputError

logger = logging.getLogger(__name__)

DEFAULT_CONFIG: Dict[str, Any] = {
    "paths": {
        "output_dir": "results",
        "log_dir": "logs",
        "nd3k_matrix": None,
    },
    "oracle": {
        "max_dense_dim": 2000,
    },
    "lanczos": {
        "reorthogonalize": True,
        "breakdown_tol": 1e-12,
    },
    "spectrum": {
        "probe_steps": 60,
        "safety": 1.01,
        "headroom": 0.99,
    },
    "slq": {
        "batch_size": 512,
        "seed": 0,
    },
    "diagnostics": {
        "symmetry_tol": 1e-8,
        "grid_points": 1000,
        "default_m": 9,
    },
    "sweep": {
        "eps_star_min": 0.01,
        "eps_star_max": 0.2,
        "eps_star_step": 0.01,
        "eta": 0.1,
    },
}

CONFIG_ENV_VAR = "SLQ_CONFIG"
ND3K_ENV_VAR = "SLQ_ND3K_PATH"


class InputValidator:
    """Validation helpers shared by the library and the CLI"""

    SPEC_PATTERN = re.compile(r'^(?P<kind>[a-z]+):(?P<body>.*)$')
    KEY_PATTERN = re.compile(r'^[a-z_]+$')

    # kind -> {key: converter}
    SPEC_KEYS = {
        'decay': {'n': int, 'r': float, 'scale': float},
        'householder': {'file': str},
        'mm': {'file': str},
        'identity': {'n': int, 'c': float},
    }

    @classmethod
    def validate_open_unit(cls, value: Any, name: str) -> float:
        """Require a finite real strictly inside (0, 1)"""
        value = cls.validate_real(value, name)
        if not 0.0 < value < 1.0:
            raise InvalidInputError(f"{name} must lie in (0, 1), got {value}")
        return value

    @classmethod
    def validate_real(cls, value: Any, name: str) -> float:
        if isinstance(value, bool):
            raise InvalidInputError(f"{name} must be a real number, got {value!r}")
        try:
            value = float(value)
        except (TypeError, ValueError):
            raise InvalidInputError(f"{name} must be a real number, got {value!r}")
        if not math.isfinite(value):
            raise InvalidInputError(f"{name} must be finite, got {value}")
        return value

    @classmethod
    def validate_positive_real(cls, value: Any, name: str) -> float:
        value = cls.validate_real(value, name)
        if value <= 0.0:
            raise InvalidInputError(f"{name} must be positive, got {value}")
        return value

    @classmethod
    def validate_positive_int(cls, value: Any, name: str, minimum: int = 1) -> int:
        """Require an integer >= minimum (booleans and floats rejected)"""
        if isinstance(value, bool):
            raise InvalidInputError(f"{name} must be an integer, got {value!r}")
        if isinstance(value, str):
            try:
                value = int(value.strip())
            except ValueError:
                raise InvalidInputError(f"{name} must be an integer, got {value!r}")
        elif isinstance(value, numbers.Integral):
            value = int(value)
        else:
            raise InvalidInputError(f"{name} must be an integer, got {value!r}")
        if value < minimum:
            raise InvalidInputError(f"{name} must be >= {minimum}, got {value}")
        return value

    @classmethod
    def validate_file_path(cls, path: Union[str, Path], must_exist: bool = True) -> Path:
        """Check a path is sane and, optionally, that it exists"""
        if not isinstance(path, (str, Path)) or not str(path).strip():
            raise InvalidInputError(f"invalid path: {path!r}")
        text = str(path)
        if len(text) > 4096 or '\x00' in text:
            raise InvalidInputError(f"invalid path: {text[:80]!r}")
        resolved = Path(text).expanduser()
        if must_exist and not resolved.is_file():
            raise InvalidInputError(f"file not found: {resolved}")
        return resolved

    @classmethod
    def parse_operator_spec(cls, spec: str) -> Dict[str, Any]:
        """
        Parse an operator spec string such as ``decay:n=500,r=0.5,scale=0.99``

        Returns:
            dict with ``kind`` plus the typed keyword arguments
        """
        if not isinstance(spec, str):
            raise MalformedInputError(f"operator spec must be a string, got {spec!r}")
        match = cls.SPEC_PATTERN.match(spec.strip())
        if not match:
            raise MalformedInputError(f"operator spec {spec!r} is not of the form kind:key=value,...")

        kind = match.group('kind')
        if kind not in cls.SPEC_KEYS:
            raise MalformedInputError(
                f"unknown operator kind {kind!r}; expected one of {sorted(cls.SPEC_KEYS)}")
        allowed = cls.SPEC_KEYS[kind]

        parsed: Dict[str, Any] = {'kind': kind}
        body = match.group('body').strip()
        for item in filter(None, (part.strip() for part in body.split(','))):
            if '=' not in item:
                raise MalformedInputError(f"operator spec item {item!r} lacks '='")
            key, raw = (s.strip() for s in item.split('=', 1))
            if not cls.KEY_PATTERN.match(key) or key not in allowed:
                raise MalformedInputError(f"unknown key {key!r} for {kind} spec")
            if key in parsed:
                raise MalformedInputError(f"duplicate key {key!r} in operator spec")
            try:
                parsed[key] = allowed[key](raw)
            except ValueError:
                raise MalformedInputError(f"bad value {raw!r} for key {key!r}")

        missing = [key for key in allowed if key not in parsed]
        if kind == 'decay':
            parsed.setdefault('scale', 1.0)
            missing = [key for key in ('n', 'r') if key not in parsed]
        if missing:
            raise MalformedInputError(f"{kind} spec missing keys: {missing}")
        return parsed

    @classmethod
    def validate_config_structure(cls, config: Dict[str, Any]) -> None:
        """Validate configuration sections and numeric ranges"""
        if not isinstance(config, dict):
            raise InvalidInputError("config must be a JSON object")

        for section in DEFAULT_CONFIG:
            if not isinstance(config.get(section), dict):
                raise InvalidInputError(f"config section '{section}' must be an object")

        cls.validate_positive_int(config['oracle']['max_dense_dim'], 'oracle.max_dense_dim')
        cls.validate_positive_real(config['lanczos']['breakdown_tol'], 'lanczos.breakdown_tol')
        cls.validate_positive_int(config['spectrum']['probe_steps'], 'spectrum.probe_steps', 2)
        if cls.validate_real(config['spectrum']['safety'], 'spectrum.safety') < 1.0:
            raise InvalidInputError("spectrum.safety must be >= 1")
        cls.validate_open_unit(config['spectrum']['headroom'], 'spectrum.headroom')
        cls.validate_positive_int(config['slq']['batch_size'], 'slq.batch_size')
        cls.validate_positive_real(config['diagnostics']['symmetry_tol'], 'diagnostics.symmetry_tol')
        cls.validate_positive_int(config['diagnostics']['grid_points'], 'diagnostics.grid_points', 2)
        cls.validate_positive_int(config['diagnostics']['default_m'], 'diagnostics.default_m')
        cls.validate_open_unit(config['sweep']['eps_star_min'], 'sweep.eps_star_min')
        cls.validate_open_unit(config['sweep']['eps_star_max'], 'sweep.eps_star_max')
        cls.validate_positive_real(config['sweep']['eps_star_step'], 'sweep.eps_star_step')
        cls.validate_open_unit(config['sweep']['eta'], 'sweep.eta')
        if config['sweep']['eps_star_min'] > config['sweep']['eps_star_max']:
            raise InvalidInputError("sweep.eps_star_min must not exceed sweep.eps_star_max")


def _deep_merge(base: Dict[str, Any], override: Dict[str, Any]) -> Dict[str, Any]:
    merged = copy.deepcopy(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = _deep_merge(merged[key], value)
        else:
            merged[key] = value
    return merged


def load_config(config_path: Optional[Union[str, Path]] = None) -> Dict[str, Any]:
    """
    Load config.json over the built-in defaults

    Resolution order: explicit path, $SLQ_CONFIG, ./config.json.
    A missing file falls back to defaults; a broken one raises.
    """
    path = Path(config_path or os.getenv(CONFIG_ENV_VAR) or 'config.json')

    if not path.exists():
        logger.warning(f"Config file not found: {path}; using built-in defaults")
        config = copy.deepcopy(DEFAULT_CONFIG)
    else:
        try:
            with open(path, 'r', encoding='utf-8') as f:
                loaded = json.load(f)
        except json.JSONDecodeError as e:
            raise MalformedInputError(f"invalid JSON in {path}: {e.msg}", e.lineno)
        if not isinstance(loaded, dict):
            raise InvalidInputError(f"config {path} must contain a JSON object")
        config = _deep_merge(DEFAULT_CONFIG, loaded)
        logger.info(f"Configuration loaded and validated: {path}")

    nd3k = os.getenv(ND3K_ENV_VAR)
    if nd3k:
        config['paths']['nd3k_matrix'] = nd3k

    InputValidator.validate_config_structure(config)
    return config
