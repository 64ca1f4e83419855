"""Reaction terms f with primitive F, and sampled probes for (f1)-(f5).

Every shipped family is built from an N-function ``Phi``:

* ``power_of_phi``    F = Phi^q                             (superlinear)
* ``sublinear``       F = kappa[(Phi(t/d) + eps)^s - eps^s]  (coercive)
* ``concave_convex``  F = lam[(Phi + eps)^a - eps^a]/a + Phi^q/q
* ``zero``            F = 0

The offset ``eps`` regularises concave powers so that f stays continuous at
0 when the exponent is at most 1/2.
"""
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import DomainError, ParameterError, ConfigurationError
from .nfunction import h_func
from .trends import (
    HOLDS,
    VIOLATED,
    _jsonable,
    describe_trend,
    grid_spec,
    log_grid,
    tail,
)

DEFAULT_REG_EPS = 1e-8


def _arr(t):
    return np.asarray(t, dtype=float)


def _out(x):
    x = np.asarray(x, dtype=float)
    return float(x) if x.ndim == 0 else x


@dataclass(frozen=True, eq=False)
class Nonlinearity:
    F_fn: Callable
    f_fn: Callable
    family: str
    params: dict = field(default_factory=dict)
    reg_eps: float = 0.0
    nf: object = None

    def F(self, t):
        return _out(self.F_fn(_arr(t)))

    def f(self, t):
        return _out(self.f_fn(_arr(t)))

    def to_dict(self):
        d = {"family": self.family}
        d.update(self.params)
        if self.reg_eps:
            d["reg_eps"] = self.reg_eps
        return d


def _reg_eps(exponent, reg_eps, name):
    if reg_eps is None:
        return 0.0 if exponent > 0.5 else DEFAULT_REG_EPS
    if reg_eps < 0:
        raise ParameterError("reg_eps must be nonnegative")
    if exponent <= 0.5 and reg_eps == 0:
        raise ParameterError(f"{name} <= 1/2 makes f discontinuous at 0; set reg_eps > 0")
    return float(reg_eps)


def _concave_power(base, dbase, exponent, eps):
    """(base + eps)^a - eps^a and its derivative, with f = 0 where base + eps = 0."""
    shifted = base + eps
    value = shifted ** exponent - eps ** exponent
    with np.errstate(divide="ignore", invalid="ignore"):
        deriv = np.where(shifted > 0, exponent * shifted ** (exponent - 1) * dbase, 0.0)
    return value, deriv


def make_zero():
    return Nonlinearity(F_fn=lambda t: np.zeros_like(t), f_fn=lambda t: np.zeros_like(t),
                        family="zero")


def make_power_of_phi(nf, q):
    """F = Phi^q, f = q Phi^{q-1} Phi'."""
    q = float(q)
    if q <= 1:
        raise ParameterError(f"power_of_phi needs q > 1, got {q}")

    def F(t):
        return _arr(nf.big_phi(t)) ** q

    def f(t):
        return q * _arr(nf.big_phi(t)) ** (q - 1) * _arr(nf.flux(t))

    return Nonlinearity(F_fn=F, f_fn=f, family="power_of_phi", params={"q": q}, nf=nf)


def make_sublinear(nf, kappa, s, d, reg_eps=None):
    """F = kappa[(Phi(|t|/d) + eps)^s - eps^s]."""
    kappa, s, d = float(kappa), float(s), float(d)
    if not 0 < s < 1:
        raise ParameterError(f"sublinear needs s in (0, 1), got {s}")
    if kappa <= 0 or d <= 0:
        raise ParameterError("sublinear needs kappa > 0 and d > 0")
    eps = _reg_eps(s, reg_eps, "s")

    def F(t):
        v, _ = _concave_power(_arr(nf.big_phi(t / d)), 0.0, s, eps)
        return kappa * v

    def f(t):
        _, dv = _concave_power(_arr(nf.big_phi(t / d)), _arr(nf.flux(t / d)) / d, s, eps)
        return kappa * dv

    return Nonlinearity(F_fn=F, f_fn=f, family="sublinear",
                        params={"kappa": kappa, "s": s, "d": d}, reg_eps=eps, nf=nf)


def make_concave_convex(nf, lam, alpha, q, reg_eps=None):
    """F = lam[(Phi + eps)^alpha - eps^alpha]/alpha + Phi^q/q.

    ``lam = 0`` is accepted as the degenerate purely superlinear case.
    """
    lam, alpha, q = float(lam), float(alpha), float(q)
    if lam < 0:
        raise ParameterError(f"concave_convex needs lambda >= 0, got {lam}")
    if not 0 < alpha < 1:
        raise ParameterError(f"concave_convex needs alpha in (0, 1), got {alpha}")
    if q <= 1:
        raise ParameterError(f"concave_convex needs q > 1, got {q}")
    eps = _reg_eps(alpha, reg_eps, "alpha")

    def F(t):
        P = _arr(nf.big_phi(t))
        v, _ = _concave_power(P, 0.0, alpha, eps)
        return lam * v / alpha + P ** q / q

    def f(t):
        P = _arr(nf.big_phi(t))
        dP = _arr(nf.flux(t))
        _, dv = _concave_power(P, dP, alpha, eps)
        return lam * dv / alpha + P ** (q - 1) * dP

    return Nonlinearity(F_fn=F, f_fn=f, family="concave_convex",
                        params={"lambda": lam, "alpha": alpha, "q": q}, reg_eps=eps, nf=nf)


def with_lambda(nl, lam):
    """Same concave-convex family with a different lambda."""
    if nl.family != "concave_convex":
        raise ParameterError("with_lambda applies to the concave_convex family only")
    p = nl.params
    return make_concave_convex(nl.nf, lam, p["alpha"], p["q"],
                               reg_eps=nl.reg_eps if nl.reg_eps > 0 else None)


def from_spec(spec, nf, d):
    spec = dict(spec)
    family = spec.pop("family", None)
    reg = spec.pop("reg_eps", None)
    try:
        if family == "zero":
            nl = make_zero()
        elif family == "power_of_phi":
            nl = make_power_of_phi(nf, spec.pop("q"))
        elif family == "sublinear":
            nl = make_sublinear(nf, spec.pop("kappa"), spec.pop("s"), spec.pop("d", d),
                                reg_eps=reg)
        elif family == "concave_convex":
            nl = make_concave_convex(nf, spec.pop("lambda"), spec.pop("alpha"), spec.pop("q"),
                                     reg_eps=reg)
        else:
            raise ConfigurationError(f"unknown family {family!r}", field="nonlinearity.family")
    except KeyError as exc:
        raise ConfigurationError(f"missing parameter {exc.args[0]!r}",
                                 field=f"nonlinearity.{exc.args[0]}") from None
    except ParameterError as exc:
        raise ConfigurationError(str(exc), field="nonlinearity") from None
    if spec:
        raise ConfigurationError(f"unknown keys {sorted(spec)}", field="nonlinearity")
    return nl


# ---------------------------------------------------------------------------
# probes
# ---------------------------------------------------------------------------

@dataclass
class ProbeReport:
    id: str
    verdict: str
    t: np.ndarray
    values: np.ndarray
    trend: str
    note: str = ""
    data: dict = field(default_factory=dict)

    @property
    def holds(self):
        return self.verdict == HOLDS

    def to_dict(self):
        return _jsonable({"id": self.id, "verdict": self.verdict, "trend": self.trend,
                          "grid_spec": grid_spec(np.abs(self.t)), "note": self.note,
                          "first": self.values[0], "final": self.values[-1], **self.data})


def default_t_max(nf):
    """Largest probe abscissa: 3 for the exponential model, 100 otherwise."""
    return 3.0 if nf.kind == "exponential" else 100.0


def _ratio(num, den):
    with np.errstate(divide="ignore", invalid="ignore"):
        return _arr(num) / _arr(den)


def check_f1(nl, nf, lo=1e-6, hi=1e-1):
    """F(t)/Phi(t) -> 0 as t -> 0, as a monotone trend on both sides."""
    t = log_grid(lo, hi)[::-1]
    reports = []
    for sign in (1.0, -1.0):
        r = _ratio(nl.F(sign * t), nf.big_phi(t))
        reports.append(r)
    values = np.maximum(np.abs(reports[0]), np.abs(reports[1]))
    trend = describe_trend(values)
    ok = bool(np.all(values == 0)) or (bool(np.all(np.diff(values) < 0))
                                        and values[-1] < values[0])
    return ProbeReport(id="f1", verdict=HOLDS if ok else VIOLATED, t=t, values=values,
                       trend=trend, note="F(t)/Phi(t) -> 0 as t -> 0 (grid ordered toward 0)")


@dataclass
class F2Result:
    theta_max: float
    holds: bool
    witness_t: float
    R: float
    t_max: float
    violation_t: float = None

    def to_dict(self):
        return _jsonable(self.__dict__)


def check_f2(nl, nf, R=1.0, t_max=None, n=400):
    """Largest theta with theta F(t) <= h(t) f(t) t on sampled R <= |t| <= t_max."""
    if R <= 0:
        raise DomainError("check_f2 needs R > 0")
    t_max = default_t_max(nf) if t_max is None else float(t_max)
    tp = np.linspace(R, t_max, n)
    t = np.concatenate([-tp[::-1], tp])
    F = _arr(nl.F(t))
    bad = np.nonzero(F <= 0)[0]
    if bad.size:
        k = bad[0]
        return F2Result(theta_max=float("nan"), holds=False, witness_t=float(t[k]), R=R,
                        t_max=t_max, violation_t=float(t[k]))
    ratio = _arr(h_func(nf, t)) * _arr(nl.f(t)) * t / F
    k = int(np.argmin(ratio))
    theta = float(ratio[k])
    return F2Result(theta_max=theta, holds=theta > 1, witness_t=float(t[k]), R=R, t_max=t_max)


def superlinearity_probe(nl, nf, t_max=None, lo=1.0):
    """F(t)/Phi(t) on a growing grid in both tails; diverging trend expected."""
    t_max = default_t_max(nf) if t_max is None else float(t_max)
    t = log_grid(lo, t_max)
    pos = _ratio(nl.F(t), nf.big_phi(t))
    neg = _ratio(nl.F(-t), nf.big_phi(t))
    ok = bool(np.all(np.diff(pos) > 0) and np.all(np.diff(neg) > 0))
    values = np.minimum(pos, neg)
    return ProbeReport(id="superlinear", verdict=HOLDS if ok else VIOLATED, t=t,
                       values=values, trend=describe_trend(values),
                       note="F(t)/Phi(t) -> inf as |t| -> inf",
                       data={"final_positive": float(pos[-1]), "final_negative": float(neg[-1]),
                             "t_max": t_max})


def _family_exponent(nl):
    if nl.family == "sublinear":
        return nl.params["s"]
    if nl.family == "concave_convex":
        return nl.params["alpha"]
    return 0.5


def check_f3_f4(nl, nf, d, delta, s=None, gamma=None, t_max=None):
    """Estimate b1 of (f3) and c1 of (f4).

    b1 = sup F(t)/(Phi(t/d))^s on sampled t != 0 (both signs), with F >= 0
    required; the ratio must not grow over the last decade for a finite b1.
    c1 = inf over sampled t in (0, delta) of F(t)/(Phi(t))^gamma; the ratio
    must not decay toward 0 as t -> 0 for a positive c1.
    """
    if d <= 0 or delta <= 0:
        raise DomainError("check_f3_f4 needs d > 0 and delta > 0")
    s = _family_exponent(nl) if s is None else float(s)
    gamma = _family_exponent(nl) if gamma is None else float(gamma)
    t_max = default_t_max(nf) if t_max is None else float(t_max)

    t = log_grid(1e-6, t_max)
    both = np.concatenate([-t[::-1], t])
    F = _arr(nl.F(both))
    nonneg = bool(np.all(F >= 0))
    r3 = _ratio(F, _arr(nf.big_phi(both / d)) ** s)
    k = int(np.nanargmax(r3))
    b1 = float(r3[k])
    _, tail_vals = tail(np.maximum(r3[t.size:], r3[:t.size][::-1]), t, 1.0, "hi")
    bounded = describe_trend(tail_vals, rtol=1e-9) in ("constant", "decreasing")
    f3_ok = nonneg and np.isfinite(b1) and bounded

    ts = log_grid(1e-6, delta)[::-1][1:]  # open interval (0, delta), ordered toward 0
    r4 = _ratio(nl.F(ts), _arr(nf.big_phi(ts)) ** gamma)
    c1 = float(np.min(r4))
    toward0 = r4[ts <= ts.min() * 10]
    decaying = describe_trend(toward0, rtol=1e-9) == "decreasing"
    f4_ok = c1 > 0 and not decaying

    return {
        "b1_est": b1, "b1_witness": float(both[k]), "f3_holds": bool(f3_ok),
        "F_nonnegative": nonneg, "s": s,
        "c1_est": c1, "c1_witness": float(ts[int(np.argmin(r4))]), "f4_holds": bool(f4_ok),
        "c1_trend_toward_0": describe_trend(toward0, rtol=1e-9), "gamma": gamma,
        "d": d, "delta": delta,
    }
