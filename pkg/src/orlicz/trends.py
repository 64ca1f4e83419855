"""Sampled surrogates for limits and monotonicity.

Limits are never evaluated directly; instead a quantity is sampled on a
log-spaced grid oriented toward the limit point and the direction of the
sequence is recorded.
"""
from dataclasses import dataclass, field

import numpy as np

HOLDS = "holds-on-samples"
VIOLATED = "violated"

POINTS_PER_DECADE = 64


def log_grid(lo, hi, per_decade=POINTS_PER_DECADE):
    """Log-spaced grid on [lo, hi] with a fixed density per decade."""
    if not (0 < lo < hi):
        raise ValueError(f"need 0 < lo < hi, got lo={lo}, hi={hi}")
    n = max(2, int(round(np.log10(hi / lo) * per_decade)) + 1)
    return np.logspace(np.log10(lo), np.log10(hi), n)


def grid_spec(t):
    t = np.asarray(t, dtype=float).ravel()
    spec = {"lo": float(t.min()), "hi": float(t.max()), "n": int(t.size)}
    if t.size > 2 and np.all(t > 0):
        r = np.diff(np.log(t))
        if np.allclose(r, r[0], rtol=1e-6):
            spec["spacing"] = "log"
            return spec
    if t.size > 2 and np.allclose(np.diff(t), t[1] - t[0], rtol=1e-6):
        spec["spacing"] = "linear"
        return spec
    spec["spacing"] = "explicit"
    spec["values"] = t.tolist()
    return spec


@dataclass
class ConditionEntry:
    """One verified condition.

    The convention is always ``lhs <= rhs`` (or ``lhs < rhs`` for strict
    conditions); ``margin`` is the minimum of ``rhs - lhs`` over the samples
    and the witness is the sample where it is attained.
    """

    id: str
    verdict: str
    witness_t: float
    lhs: float
    rhs: float
    margin: float
    grid_spec: dict
    note: str = ""
    data: dict = field(default_factory=dict)

    @property
    def holds(self):
        return self.verdict == HOLDS

    def to_dict(self):
        return {
            "id": self.id,
            "verdict": self.verdict,
            "witness_t": _jsonable(self.witness_t),
            "lhs": _jsonable(self.lhs),
            "rhs": _jsonable(self.rhs),
            "margin": _jsonable(self.margin),
            "grid_spec": self.grid_spec,
            "note": self.note,
            "data": {k: _jsonable(v) for k, v in self.data.items()},
        }


def _jsonable(v):
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple, np.ndarray)):
        return [_jsonable(x) for x in v]
    if isinstance(v, (np.floating, float)):
        v = float(v)
        if np.isnan(v):
            return None
        if np.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, np.bool_):
        return bool(v)
    return v


def inequality_entry(cid, t, lhs, rhs, grid, strict=False, rtol=1e-12, note="", data=None):
    """Entry for a pointwise inequality ``lhs(t) <= rhs(t)`` on samples."""
    t = np.asarray(t, dtype=float)
    lhs = np.asarray(lhs, dtype=float)
    rhs = np.asarray(rhs, dtype=float)
    gap = rhs - lhs
    k = int(np.argmin(gap))
    scale = np.maximum(np.maximum(np.abs(lhs), np.abs(rhs)), 1e-300)
    if strict:
        ok = bool(np.all(gap > 0))
    else:
        ok = bool(np.all(gap >= -rtol * scale))
    return ConditionEntry(
        id=cid,
        verdict=HOLDS if ok else VIOLATED,
        witness_t=float(t[k]),
        lhs=float(lhs[k]),
        rhs=float(rhs[k]),
        margin=float(gap[k]),
        grid_spec=grid_spec(grid),
        note=note,
        data=data or {},
    )


def monotone_entry(cid, t, values, increasing=True, strict=False, rtol=1e-10,
                   note="", data=None):
    """Entry asserting a monotone sequence along the order of ``t``.

    Pairs are compared as ``lhs = v[i], rhs = v[i+1]`` for increasing
    sequences and reversed for decreasing ones; the witness is the first
    index of the worst pair.
    """
    t = np.asarray(t, dtype=float)
    v = np.asarray(values, dtype=float)
    if increasing:
        lhs, rhs = v[:-1], v[1:]
    else:
        lhs, rhs = v[1:], v[:-1]
    return inequality_entry(cid, t[:-1], lhs, rhs, t, strict=strict, rtol=rtol,
                            note=note, data=data)


def describe_trend(values, rtol=1e-10):
    """Classify a sampled sequence as increasing, decreasing, constant or mixed."""
    v = np.asarray(values, dtype=float)
    dv = np.diff(v)
    scale = np.maximum(np.abs(v[:-1]), np.abs(v[1:]))
    tol = rtol * np.maximum(scale, 1e-300)
    up = dv > tol
    down = dv < -tol
    if not up.any() and not down.any():
        return "constant"
    if not down.any():
        return "increasing"
    if not up.any():
        return "decreasing"
    return "mixed"


def tail(values, t, decades=1.0, toward="hi"):
    """Slice of samples covering the last ``decades`` toward one end of ``t``."""
    t = np.asarray(t, dtype=float)
    v = np.asarray(values, dtype=float)
    if toward == "hi":
        mask = t >= t.max() / 10 ** decades
    else:
        mask = t <= t.min() * 10 ** decades
    return t[mask], v[mask]
