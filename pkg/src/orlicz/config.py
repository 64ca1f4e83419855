"""Run configuration: one JSON document, validated before any computation.

Schema (unknown keys are rejected at every level)::

    {
      "nfunction":   {"kind": "exponential"} | {"kind": "power", "p": 3},
      "nonlinearity": {"family": "zero" | "power_of_phi" | "sublinear" | "concave_convex",
                       ...family parameters..., "reg_eps": optional},
      "mesh":        {"nx": 32, "ny": 32, "Lx": 1.0, "Ly": 1.0},
      "solver":      {SolverConfig fields; "armijo" and "lambda_sweep" as objects},
      "check":       {"p": 3.0, "delta": 0.5, "R": 1.0, "k_max": 1e6},
      "output":      {"dir": "out", "prefix": "run"},
      "strict":      false
    }

Family parameters: power_of_phi {q}; sublinear {kappa, s, d?} (d defaults to
twice the mesh diameter); concave_convex {lambda, alpha, q}.
"""
import json
import re
from dataclasses import dataclass, field, fields

from . import discretize as D
from . import nfunction as NF
from . import nonlinearity as NL
from .errors import ConfigurationError, DomainError, ParameterError
from .solvers import SolverConfig

TOP_KEYS = {"nfunction", "nonlinearity", "mesh", "solver", "check", "output", "strict"}
NF_KEYS = {"exponential": {"kind"}, "power": {"kind", "p"}}
MESH_KEYS = {"nx", "ny", "Lx", "Ly"}
CHECK_DEFAULTS = {"p": 3.0, "delta": 0.5, "R": 1.0, "k_max": 1e6}
OUTPUT_DEFAULTS = {"dir": ".", "prefix": "run"}
SOLVER_KEYS = {f.name for f in fields(SolverConfig)}
ARMIJO_KEYS = {"c", "shrink", "step0", "min_step"}
SWEEP_KEYS = {"start", "shrink", "max_halvings"}


@dataclass
class RunConfig:
    nfunction: dict
    nonlinearity: dict
    mesh: D.Mesh
    solver: SolverConfig
    check: dict = field(default_factory=lambda: dict(CHECK_DEFAULTS))
    output: dict = field(default_factory=lambda: dict(OUTPUT_DEFAULTS))
    strict: bool = False

    def build_nfunction(self):
        return NF.from_spec(self.nfunction)

    def build_problem(self):
        nf = self.build_nfunction()
        nl = NL.from_spec(self.nonlinearity, nf, self.mesh.d)
        return D.Problem(self.mesh, nf, nl)

    def family_spec(self):
        return dict(self.nonlinearity)


def _line_of(text, key):
    """1-based line of the first occurrence of ``"key"`` in the source text."""
    if text is None:
        return None
    m = re.search(r'"%s"\s*:' % re.escape(key), text)
    return text.count("\n", 0, m.start()) + 1 if m else None


def _reject_unknown(section, allowed, prefix, text):
    if not isinstance(section, dict):
        raise ConfigurationError("expected an object", field=prefix, line=_line_of(text, prefix))
    extra = sorted(set(section) - set(allowed))
    if extra:
        raise ConfigurationError(f"unknown key(s) {extra}", field=f"{prefix}.{extra[0]}",
                                 line=_line_of(text, extra[0]))


def _number(section, key, prefix, text, integer=False, positive=True):
    v = section[key]
    ok = isinstance(v, (int, float)) and not isinstance(v, bool)
    if integer:
        ok = ok and float(v).is_integer()
    if not ok or (positive and not v > 0):
        kind = "a positive integer" if integer else "a positive number"
        raise ConfigurationError(f"must be {kind}, got {v!r}", field=f"{prefix}.{key}",
                                 line=_line_of(text, key))
    return int(v) if integer else float(v)


def parse_config(data, text=None):
    """Validate a decoded JSON document into a RunConfig."""
    if not isinstance(data, dict):
        raise ConfigurationError("top level must be a JSON object", line=1)
    _reject_unknown(data, TOP_KEYS, "config", text)
    for key in ("nfunction", "nonlinearity", "mesh"):
        if key not in data:
            raise ConfigurationError("missing section", field=key)

    nf_spec = data["nfunction"]
    if not isinstance(nf_spec, dict) or nf_spec.get("kind") not in NF_KEYS:
        raise ConfigurationError(f"kind must be one of {sorted(NF_KEYS)}",
                                 field="nfunction.kind", line=_line_of(text, "kind"))
    _reject_unknown(nf_spec, NF_KEYS[nf_spec["kind"]], "nfunction", text)
    if nf_spec["kind"] == "power":
        if "p" not in nf_spec:
            raise ConfigurationError("missing exponent", field="nfunction.p")
        if _number(nf_spec, "p", "nfunction", text) <= 1:
            raise ConfigurationError("must be > 1", field="nfunction.p",
                                     line=_line_of(text, "p"))

    mesh_spec = data["mesh"]
    _reject_unknown(mesh_spec, MESH_KEYS, "mesh", text)
    for key in ("nx", "ny"):
        if key not in mesh_spec:
            raise ConfigurationError("missing", field=f"mesh.{key}")
    mesh = D.Mesh(_number(mesh_spec, "nx", "mesh", text, integer=True),
                  _number(mesh_spec, "ny", "mesh", text, integer=True),
                  _number(mesh_spec, "Lx", "mesh", text) if "Lx" in mesh_spec else 1.0,
                  _number(mesh_spec, "Ly", "mesh", text) if "Ly" in mesh_spec else 1.0)
    if mesh.nx < 2 or mesh.ny < 2:
        raise ConfigurationError("need at least 2 cells per direction for an interior node",
                                 field="mesh.nx" if mesh.nx < 2 else "mesh.ny")

    solver = _parse_solver(data.get("solver", {}), text)
    check = dict(CHECK_DEFAULTS)
    sec = data.get("check", {})
    _reject_unknown(sec, CHECK_DEFAULTS, "check", text)
    for key in sec:
        check[key] = _number(sec, key, "check", text)
    output = dict(OUTPUT_DEFAULTS)
    sec = data.get("output", {})
    _reject_unknown(sec, OUTPUT_DEFAULTS, "output", text)
    for key, v in sec.items():
        if not isinstance(v, str) or not v:
            raise ConfigurationError("must be a nonempty string", field=f"output.{key}",
                                     line=_line_of(text, key))
        output[key] = v
    strict = data.get("strict", False)
    if not isinstance(strict, bool):
        raise ConfigurationError("must be true or false", field="strict",
                                 line=_line_of(text, "strict"))

    cfg = RunConfig(nfunction=dict(nf_spec), nonlinearity=dict(data["nonlinearity"]),
                    mesh=mesh, solver=solver, check=check, output=output, strict=strict)
    if not isinstance(cfg.nonlinearity, dict):
        raise ConfigurationError("expected an object", field="nonlinearity")
    try:
        cfg.build_problem()
    except ConfigurationError as exc:
        if exc.line is None and exc.field:
            raise ConfigurationError(str(exc).split(": ", 1)[-1], field=exc.field,
                                     line=_line_of(text, exc.field.split(".")[-1])) from None
        raise
    except (ParameterError, DomainError, TypeError) as exc:
        raise ConfigurationError(str(exc), field="nonlinearity",
                                 line=_line_of(text, "nonlinearity")) from None
    return cfg


def _parse_solver(sec, text):
    _reject_unknown(sec, SOLVER_KEYS, "solver", text)
    kwargs = dict(sec)
    if "armijo" in kwargs:
        _reject_unknown(kwargs["armijo"], ARMIJO_KEYS, "solver.armijo", text)
    if "lambda_sweep" in kwargs:
        _reject_unknown(kwargs["lambda_sweep"], SWEEP_KEYS, "solver.lambda_sweep", text)
    for key in ("max_iter", "path_nodes", "ring_samples"):
        if key in kwargs:
            kwargs[key] = _number(kwargs, key, "solver", text, integer=True)
    if "seed" in kwargs:
        kwargs["seed"] = _number(kwargs, "seed", "solver", text, integer=True, positive=False)
    try:
        return SolverConfig(**kwargs)
    except (ParameterError, TypeError, ValueError) as exc:
        raise ConfigurationError(str(exc), field="solver", line=_line_of(text, "solver")) from None


def load_config(path, seed_override=None):
    """Read and validate a JSON config file; ``seed_override`` replaces solver.seed."""
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigurationError(f"cannot read config: {exc}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"invalid JSON: {exc.msg}", line=exc.lineno) from None
    if seed_override is not None and isinstance(data, dict):
        data.setdefault("solver", {})
        if isinstance(data["solver"], dict):
            data["solver"] = dict(data["solver"], seed=seed_override)
    return parse_config(data, text)
