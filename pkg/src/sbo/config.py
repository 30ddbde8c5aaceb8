"""JSON run configuration: parsing, defaults, validation and canonical output."""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, fields

from .bilinear import BILINEAR_CASES
from .errors import ConfigError
from .gateaux import GATEAUX_CASES

COMMANDS = ("solve", "conserve", "scaling", "picard", "probe-gateaux", "probe-bilinear", "oracle-calculus")
BOUNDEDNESS_CASE = "boundedness"
GRID_KEYS = ("L", "n", "dt", "T")
CALCULUS_PARAM_KEYS = ("alpha", "beta", "gamma", "p", "q", "r")


@dataclass
class RunConfig:
    command: str
    alpha: float = 1.0
    beta: float = 1.0
    nu: float = 0.5
    s: float = 0.0
    s_prime: float = 0.0
    b: float = 0.55
    b_prime: float = 0.55
    c: float = 0.6
    c_prime: float = 0.6
    case: str | None = None
    N_list: list = field(default_factory=lambda: [8, 16, 32, 64, 128, 256])
    t: float = 1.0
    trials: int = 4
    output: str = ""
    seed: int = 0
    lambda_: list = field(default_factory=lambda: [2, 4])
    iterations: int = 8
    quadrature_nodes: int = 33
    which: str = "all"
    params: dict = field(default_factory=dict)
    grid: dict | None = None
    initial: dict = field(default_factory=dict)
    record_every: int = 1
    resolution: int = 0

    def to_json(self) -> str:
        """Canonical document; ``parse_config(cfg.to_json()) == cfg``."""
        d = asdict(self)
        d["lambda"] = d.pop("lambda_")
        if d["grid"] is None:
            del d["grid"]
        if d["case"] is None:
            del d["case"]
        return json.dumps(d, sort_keys=True, indent=2)


_KEY_MAP = {f.name: f.name for f in fields(RunConfig)}
_KEY_MAP["lambda"] = _KEY_MAP.pop("lambda_")


def _number(value, path, integer=False, positive=False):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{path}: expected a number, got {value!r}")
    if not math.isfinite(value):
        raise ConfigError(f"{path}: must be finite")
    if integer and int(value) != value:
        raise ConfigError(f"{path}: expected an integer, got {value!r}")
    if positive and not value > 0:
        raise ConfigError(f"{path}: must be positive, got {value!r}")
    return int(value) if integer else float(value)


def _validate_profile(profile, path):
    if not isinstance(profile, dict):
        raise ConfigError(f"{path}: expected an object")
    allowed = {"type", "amplitude", "center", "width", "wavenumber", "mode", "path"}
    for k in profile:
        if k not in allowed:
            raise ConfigError(f"{path}.{k}: unknown key")
    kind = profile.get("type", "gaussian")
    if kind not in ("zero", "gaussian", "packet", "single-mode", "csv"):
        raise ConfigError(f"{path}.type: unknown profile type {kind!r}")
    if kind == "single-mode" and "mode" not in profile:
        raise ConfigError(f"{path}.mode: required for single-mode profiles")
    if kind == "csv" and "path" not in profile:
        raise ConfigError(f"{path}.path: required for csv profiles")
    for k in ("amplitude", "center", "width", "wavenumber"):
        if k in profile:
            _number(profile[k], f"{path}.{k}")
    if "mode" in profile:
        _number(profile["mode"], f"{path}.mode", integer=True)


def parse_config(text: str, command: str | None = None) -> RunConfig:
    """Parse and validate a JSON document; ``command`` overrides or must match its ``command``."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"<root>: malformed JSON ({exc.msg} at line {exc.lineno} column {exc.colno})") from None
    if not isinstance(doc, dict):
        raise ConfigError("<root>: expected a JSON object")
    for key in doc:
        if key not in _KEY_MAP:
            raise ConfigError(f"{key}: unknown key")
    cmd = doc.get("command", command)
    if cmd is None:
        raise ConfigError("command: required")
    if command is not None and cmd != command:
        raise ConfigError(f"command: config says {cmd!r} but {command!r} was requested")
    if cmd not in COMMANDS:
        raise ConfigError(f"command: unknown command {cmd!r}; expected one of {', '.join(COMMANDS)}")
    cfg = RunConfig(command=cmd)
    explicit = set(doc)

    for key in ("alpha", "beta", "nu", "s", "s_prime", "b", "b_prime", "c", "c_prime", "t"):
        if key in doc:
            setattr(cfg, key, _number(doc[key], key))
    for key in ("trials", "iterations", "quadrature_nodes", "record_every", "resolution"):
        if key in doc:
            setattr(cfg, key, _number(doc[key], key, integer=True))
    if "seed" in doc:
        cfg.seed = _number(doc["seed"], "seed", integer=True)
        if not 0 <= cfg.seed < 2 ** 64:
            raise ConfigError("seed: must be an unsigned 64-bit integer")
    if "output" in doc:
        if not isinstance(doc["output"], str):
            raise ConfigError("output: expected a string")
        cfg.output = doc["output"]
    if "N_list" in doc:
        if not isinstance(doc["N_list"], list) or not doc["N_list"]:
            raise ConfigError("N_list: expected a non-empty list")
        cfg.N_list = [_number(v, f"N_list[{i}]", positive=True) for i, v in enumerate(doc["N_list"])]
        cfg.N_list = [int(v) if v == int(v) else v for v in cfg.N_list]
    if "lambda" in doc:
        lam = doc["lambda"] if isinstance(doc["lambda"], list) else [doc["lambda"]]
        cfg.lambda_ = [_number(v, f"lambda[{i}]", integer=True, positive=True) for i, v in enumerate(lam)]
    if "which" in doc:
        if doc["which"] not in ("i", "ii", "iii", "all"):
            raise ConfigError(f"which: expected i, ii, iii or all, got {doc['which']!r}")
        cfg.which = doc["which"]
    if "params" in doc:
        if not isinstance(doc["params"], dict):
            raise ConfigError("params: expected an object")
        for k, v in doc["params"].items():
            if k not in CALCULUS_PARAM_KEYS:
                raise ConfigError(f"params.{k}: unknown key")
            _number(v, f"params.{k}")
        cfg.params = {k: float(v) for k, v in doc["params"].items()}
    if "grid" in doc:
        if not isinstance(doc["grid"], dict):
            raise ConfigError("grid: expected an object")
        for k in doc["grid"]:
            if k not in GRID_KEYS:
                raise ConfigError(f"grid.{k}: unknown key")
        g = {}
        for k, v in doc["grid"].items():
            g[k] = _number(v, f"grid.{k}", integer=(k == "n"), positive=True)
        cfg.grid = g
    if "initial" in doc:
        if not isinstance(doc["initial"], dict):
            raise ConfigError("initial: expected an object")
        for k, v in doc["initial"].items():
            if k not in ("u", "v"):
                raise ConfigError(f"initial.{k}: unknown key")
            _validate_profile(v, f"initial.{k}")
        cfg.initial = doc["initial"]
    if "case" in doc:
        if not isinstance(doc["case"], str):
            raise ConfigError("case: expected a string")
        cfg.case = doc["case"]

    _command_requirements(cfg, explicit)
    return cfg


def _require_grid(cfg, keys):
    for k in keys:
        if cfg.grid is None or k not in cfg.grid:
            raise ConfigError(f"grid.{k}: required for command {cfg.command!r}")
    n = cfg.grid["n"]
    if n < 8 or n & (n - 1):
        raise ConfigError(f"grid.n: must be a power of two >= 8, got {n}")


def _command_requirements(cfg: RunConfig, explicit: set):
    cmd = cfg.command
    if cmd in ("solve", "conserve"):
        _require_grid(cfg, ("n", "L", "dt", "T"))
    elif cmd == "picard":
        _require_grid(cfg, ("n", "L", "T"))
        if cfg.iterations < 1:
            raise ConfigError("iterations: must be >= 1")
        if cfg.quadrature_nodes < 4:
            raise ConfigError("quadrature_nodes: must be >= 4")
    elif cmd == "scaling":
        _require_grid(cfg, ("n", "L"))
    elif cmd == "probe-gateaux":
        if cfg.case not in GATEAUX_CASES:
            raise ConfigError(f"case: expected one of {', '.join(GATEAUX_CASES)}, got {cfg.case!r}")
        if cfg.case.startswith("T13"):
            _force_nu(cfg, explicit, 1.0, "T13 cases require |nu| = 1", lambda nu: abs(nu) == 1)
    elif cmd == "probe-bilinear":
        allowed = BILINEAR_CASES + (BOUNDEDNESS_CASE,)
        if cfg.case not in allowed:
            raise ConfigError(f"case: expected one of {', '.join(allowed)}, got {cfg.case!r}")
        if cfg.case == "T43":
            _force_nu(cfg, explicit, 1.0, "T43 requires |nu| = 1", lambda nu: abs(nu) == 1)
            if "s" not in explicit:
                cfg.s = 0.0
            if "s_prime" not in explicit:
                cfg.s_prime = -0.5
        elif cfg.case == "T42iii":
            _force_nu(cfg, explicit, 0.0, "T42iii requires nu = 0", lambda nu: nu == 0)
        elif cfg.case != BOUNDEDNESS_CASE and abs(cfg.nu) == 1:
            raise ConfigError(f"nu: {cfg.case} requires |nu| != 1")
    if cmd in ("probe-gateaux", "probe-bilinear") and len(cfg.N_list) < 5:
        raise ConfigError(f"N_list: need at least 5 values, got {len(cfg.N_list)}")


def _force_nu(cfg, explicit, value, message, ok):
    if "nu" in explicit:
        if not ok(cfg.nu):
            raise ConfigError(f"nu: {message}, got {cfg.nu}")
    else:
        cfg.nu = value
