"""N-functions: evaluation, Legendre conjugate, inversion and condition checks.

An N-function is represented through its density ``phi``, with

    Phi(t) = int_0^|t| s phi(s) ds,     Phi'(t) = t phi(|t|).

Two models are built in: the exponential ``Phi(t) = (exp(t^2) - 1)/2``,
which escapes every Delta_2 bound, and the power ``Phi(t) = |t|^p / p``.
"""
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Optional

import numpy as np
from scipy import integrate

from .errors import ConfigurationError, DomainError, EvaluationError, OverflowGuardError
from .trends import (
    HOLDS,
    VIOLATED,
    ConditionEntry,
    _jsonable,
    describe_trend,
    grid_spec,
    inequality_entry,
    log_grid,
    monotone_entry,
)

# exp(700) is still finite in double precision
EXP_ARG_MAX = 700.0

BISECT_XTOL = 1e-12
BISECT_MAXITER = 200


def _as_array(t):
    return np.asarray(t, dtype=float)


def _out(x):
    x = np.asarray(x, dtype=float)
    return float(x) if x.ndim == 0 else x


@dataclass(frozen=True)
class NFunction:
    """An N-function given by its density.

    ``phi_fn`` evaluates the density on ``t >= 0`` (vectorised).  Optional
    closed forms ``dphi_fn`` and ``big_phi_fn`` are used when present;
    otherwise ``phi'`` falls back to central differences with step
    ``h_fd * max(1, |t|)`` and ``Phi`` to adaptive quadrature.
    """

    phi_fn: Callable
    kind: str = "custom"
    p_growth: Optional[float] = None
    dphi_fn: Optional[Callable] = None
    big_phi_fn: Optional[Callable] = None
    flux_fn: Optional[Callable] = None
    h_fd: Optional[float] = 1e-6
    t_guard: float = np.inf
    params: dict = field(default_factory=dict)
    conjugate_fn: Optional[Callable] = None

    def __hash__(self):
        return id(self)

    # -- evaluation -----------------------------------------------------
    def _guard(self, t):
        if np.isfinite(self.t_guard):
            a = np.abs(t)
            if np.any(a > self.t_guard):
                bad = float(np.max(a))
                raise OverflowGuardError(
                    f"|t|={bad:.6g} exceeds the working range {self.t_guard:.6g} "
                    f"of the {self.kind} N-function", t=bad)

    def phi(self, t):
        """Density phi(|t|)."""
        a = np.abs(_as_array(t))
        self._guard(a)
        return _out(self.phi_fn(a))

    def flux(self, t):
        """Phi'(t) = t phi(|t|); odd in t."""
        t = _as_array(t)
        self._guard(t)
        if self.flux_fn is not None:
            return _out(self.flux_fn(t))
        a = np.abs(t)
        with np.errstate(divide="ignore", invalid="ignore"):
            val = np.where(a > 0, t * self.phi_fn(a), 0.0)
        return _out(val)

    def dphi(self, t):
        """phi'(|t|), closed form or central difference."""
        a = np.abs(_as_array(t))
        self._guard(a)
        if self.dphi_fn is not None:
            return _out(self.dphi_fn(a))
        if self.h_fd is None:
            raise ConfigurationError("phi' has no closed form and h_fd is unset")
        h = self.h_fd * np.maximum(1.0, a)
        return _out((self.phi_fn(a + h) - self.phi_fn(np.abs(a - h))) / (2 * h))

    def big_phi(self, t):
        """Phi(|t|)."""
        a = np.abs(_as_array(t))
        self._guard(a)
        if self.big_phi_fn is not None:
            return _out(self.big_phi_fn(a))
        return _out(np.vectorize(self._quad_big_phi, otypes=[float])(a))

    def _quad_big_phi(self, a):
        if a == 0:
            return 0.0
        val, err, info = integrate.quad(lambda s: s * float(self.phi_fn(np.asarray(s))),
                                        0.0, a, epsabs=0.0, epsrel=1e-13, limit=200,
                                        full_output=True)[:3]
        if err > 1e-10 * max(abs(val), 1e-300) and "message" in info:
            raise EvaluationError(f"quadrature for Phi({a}) did not converge", t=a)
        return val

    def __call__(self, t):
        return self.big_phi(t)

    # -- structural indices --------------------------------------------
    @cached_property
    def l_index(self):
        """Sampled infimum of t^2 phi(t) / Phi(t) over t > 0."""
        hi = min(1e3, 0.9 * self.t_guard)
        t = log_grid(1e-6, hi)
        return float(np.min(index_ratio(self, t)))

    def to_dict(self):
        d = {"kind": self.kind}
        d.update(self.params)
        return d


def exponential():
    """The model Phi(t) = (exp(t^2) - 1)/2, phi(t) = exp(t^2)."""
    return NFunction(
        phi_fn=lambda a: np.exp(a * a),
        dphi_fn=lambda a: 2 * a * np.exp(a * a),
        big_phi_fn=lambda a: 0.5 * np.expm1(a * a),
        flux_fn=lambda t: t * np.exp(t * t),
        kind="exponential",
        t_guard=float(np.sqrt(EXP_ARG_MAX)),
    )


def power(p):
    """The model Phi(t) = |t|^p / p."""
    p = float(p)
    if p <= 1:
        raise DomainError(f"power N-function needs p > 1, got {p}")

    def flux(t):
        return np.sign(t) * np.abs(t) ** (p - 1)

    def conj(s):
        q = p / (p - 1)
        return np.abs(s) ** q / q

    return NFunction(
        phi_fn=lambda a: a ** (p - 2),
        dphi_fn=lambda a: (p - 2) * a ** (p - 3),
        big_phi_fn=lambda a: a ** p / p,
        flux_fn=flux,
        kind="power",
        p_growth=p,
        params={"p": p},
        conjugate_fn=conj,
    )


def custom(phi, dphi=None, big_phi=None, p_growth=None, h_fd=1e-6, t_guard=np.inf):
    """N-function from a user density; Phi by quadrature unless supplied."""
    return NFunction(phi_fn=phi, dphi_fn=dphi, big_phi_fn=big_phi, p_growth=p_growth,
                     h_fd=h_fd, t_guard=t_guard)


def from_spec(spec):
    kind = spec.get("kind")
    if kind == "exponential":
        return exponential()
    if kind == "power":
        return power(spec["p"])
    raise ConfigurationError(f"unknown N-function kind {kind!r}", field="nfunction.kind")


# ---------------------------------------------------------------------------
# scalar calculus
# ---------------------------------------------------------------------------

def big_phi(nf, t):
    return nf.big_phi(t)


def index_ratio(nf, t):
    """t^2 phi(t) / Phi(t) for t > 0."""
    t = np.abs(_as_array(t))
    return _out(t * nf.flux(t) / nf.big_phi(t))


def _bisect_increasing(fn, target, hi_limit, what):
    """Solve fn(t) = target for t >= 0 with fn increasing, fn(0) = 0.

    The bracket starts at [0, 1] and grows geometrically; it may not exceed
    ``hi_limit``.  Vectorised over ``target``.
    """
    y = _as_array(target)
    shape = y.shape
    y = y.ravel()
    lo = np.zeros_like(y)
    hi = np.ones_like(y)
    while True:
        short = fn(hi) < y
        if not short.any():
            break
        if np.any(hi[short] >= hi_limit):
            bad = float(y[short].max())
            raise EvaluationError(f"{what}: value {bad:.6g} outside working range", t=bad)
        hi[short] = np.minimum(2 * hi[short], hi_limit)
    for _ in range(BISECT_MAXITER):
        if np.all(hi - lo <= BISECT_XTOL):
            break
        mid = 0.5 * (lo + hi)
        below = fn(mid) < y
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    t = 0.5 * (lo + hi)
    t[y == 0] = 0.0
    return t.reshape(shape)


def big_phi_inverse(nf, y):
    """t >= 0 with Phi(t) = y, by bisection."""
    y = _as_array(y)
    if np.any(y < 0):
        raise DomainError("big_phi_inverse needs y >= 0")
    return _out(_bisect_increasing(nf.big_phi, y, nf.t_guard, "Phi^{-1}"))


def flux_inverse(nf, s):
    """t >= 0 with t phi(t) = s."""
    s = _as_array(s)
    if np.any(s < 0):
        raise DomainError("flux inverse needs s >= 0")
    return _out(_bisect_increasing(nf.flux, s, nf.t_guard, "Phi*"))


def conjugate(nf, s):
    """Complementary function Phi*(s) = max_{t >= 0} (s t - Phi(t)).

    The maximiser solves t phi(t) = s; power kinds use |s|^{p'}/p'.
    """
    s = _as_array(s)
    if np.any(s < 0):
        raise DomainError("conjugate needs s >= 0")
    if nf.conjugate_fn is not None:
        return _out(nf.conjugate_fn(s))
    t = _as_array(flux_inverse(nf, s))
    return _out(s * t - nf.big_phi(t))


def conjugate_nfunction(nf):
    """Phi* as an N-function: its density is t(s)/s where t(s) phi(t(s)) = s."""
    def phi_star(a):
        a = _as_array(a)
        t = _as_array(flux_inverse(nf, a))
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(a > 0, t / a, 1.0 / float(nf.phi(1e-8)))

    guard = float(nf.flux(nf.t_guard)) if np.isfinite(nf.t_guard) else np.inf
    return NFunction(
        phi_fn=phi_star,
        big_phi_fn=lambda a: conjugate(nf, a),
        flux_fn=lambda s: np.sign(s) * _as_array(flux_inverse(nf, np.abs(s))),
        kind=f"conjugate({nf.kind})",
        t_guard=guard,
        params={"of": nf.to_dict()},
    )


def h_func(nf, t):
    """h(t) = Phi(t) / (t^2 phi(t)); even, undefined at 0."""
    t = _as_array(t)
    if np.any(t == 0):
        raise DomainError("h(t) is undefined at t = 0; use 1/l_index as the limit")
    a = np.abs(t)
    return _out(nf.big_phi(a) / (a * nf.flux(a)))


# ---------------------------------------------------------------------------
# Delta_2
# ---------------------------------------------------------------------------

@dataclass
class Delta2Result:
    holds: bool
    sup_ratio: float
    witness: float
    k_max: float
    grid: dict

    def to_dict(self):
        return _jsonable({"holds": self.holds, "sup_ratio": self.sup_ratio,
                          "witness": self.witness, "k_max": self.k_max, "grid": self.grid})


def check_delta2(nf, t_grid, k_max=1e6):
    """Sup over the grid of Phi(2t)/Phi(t) against the bound ``k_max``."""
    t = _as_array(t_grid).ravel()
    if t.size == 0 or np.any(t <= 0):
        raise DomainError("Delta_2 grid must be nonempty and positive")
    ratio = _as_array(nf.big_phi(2 * t)) / _as_array(nf.big_phi(t))
    k = int(np.argmax(ratio))
    sup = float(ratio[k])
    return Delta2Result(holds=sup <= k_max, sup_ratio=sup, witness=float(t[k]),
                        k_max=k_max, grid=grid_spec(t))


# ---------------------------------------------------------------------------
# condition report
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Probe:
    """Sample grids and parameter tuples for ``check_phi_conditions``."""

    small: np.ndarray
    mid: np.ndarray
    large: np.ndarray
    phi6: tuple = ((1.0, 1.0, 2.0), (1.0, 2.0, 1.5), (2.0, 1.0, 3.0))
    phi8: tuple = ((1.0, 1.0, 0.75), (2.0, 1.0, 0.5), (1.0, 2.0, 0.9))

    @property
    def union(self):
        return np.unique(np.concatenate([self.small, self.mid, self.large]))


def default_probe(nf, decades=6, per_decade=64):
    cap = 0.95 * nf.t_guard if np.isfinite(nf.t_guard) else 10.0 ** decades
    small = log_grid(10.0 ** -decades, 1.0, per_decade)
    mid = log_grid(1e-2, min(10.0, cap / 2), per_decade)
    large = log_grid(1.0, cap, per_decade)
    return Probe(small=small, mid=mid, large=large)


@dataclass
class ConditionReport:
    entries: list
    grids: dict
    nfunction: dict

    def __getitem__(self, cid):
        for e in self.entries:
            if e.id == cid:
                return e
        raise KeyError(cid)

    @property
    def violations(self):
        return [e.id for e in self.entries if e.verdict == VIOLATED]

    def to_dict(self):
        return {"nfunction": _jsonable(self.nfunction), "grids": self.grids,
                "conditions": [e.to_dict() for e in self.entries]}


def phi4_terms(nf, t):
    """The three members of the two-sided inequality (phi_4) as printed."""
    t = np.abs(_as_array(t))
    ratio = _as_array(index_ratio(nf, t))
    middle = 1.0 + t * _as_array(nf.dphi(t)) / _as_array(nf.phi(t))
    return ratio, middle, 2 * ratio


def _log_big_phi(nf, t):
    return np.log(_as_array(nf.big_phi(t)))


def _limit_entry(cid, t, vals, expect, toward, note, data=None):
    """Monotone-trend verdict for a limit as t -> 0 (toward='lo') or infinity.

    Only the half of the (log-spaced) grid nearest the limit point is used.
    ``expect``: 'inf' (sequence grows toward the limit point), 'zero'
    (shrinks toward it), 'bounded' (does not grow), 'positive' (does not
    shrink).
    """
    t = _as_array(t)
    vals = _as_array(vals)
    logt = np.log(t)
    mid = 0.5 * (logt.min() + logt.max())
    keep = logt <= mid if toward == "lo" else logt >= mid
    ts, vs = t[keep], vals[keep]
    order = np.argsort(ts)
    if toward == "lo":
        order = order[::-1]
    ts, vs = ts[order], vs[order]
    increasing = expect in ("inf", "positive")
    strict = expect in ("inf", "zero")
    rtol = 0.0 if strict else 1e-9
    entry = monotone_entry(cid, ts, vs, increasing=increasing, strict=strict, rtol=rtol,
                           note=note)
    entry.grid_spec = grid_spec(ts)
    entry.data.update({"trend": describe_trend(vs), "toward": "0+" if toward == "lo" else "+inf",
                       "first": float(vs[0]), "final": float(vs[-1])})
    if data:
        entry.data.update(data)
    return entry


def _merge(cid, subentries, note):
    """Single entry for a condition with several clauses: the worst clause wins."""
    bad = [e for e in subentries if e.verdict == VIOLATED]
    pick = bad[0] if bad else min(subentries, key=lambda e: e.margin)
    out = ConditionEntry(id=cid, verdict=VIOLATED if bad else HOLDS, witness_t=pick.witness_t,
                         lhs=pick.lhs, rhs=pick.rhs, margin=pick.margin,
                         grid_spec=pick.grid_spec, note=note)
    out.data["clauses"] = {e.id: e.to_dict() for e in subentries}
    out.data["worst_clause"] = pick.id
    return out


def check_phi_conditions(nf, d, p, probe=None, k_max=1e6):
    """Verify (phi_1)-(phi_8), Delta_2 and Delta_2 for the conjugate on samples.

    Inequalities are evaluated exactly as stated; limits through monotone
    trends on log-spaced grids.
    """
    if d <= 0 or p <= 0:
        raise DomainError("check_phi_conditions needs d > 0 and p > 0")
    if nf.dphi_fn is None and nf.h_fd is None:
        raise ConfigurationError("phi' unavailable and h_fd unset")
    probe = probe or default_probe(nf)
    u = probe.union
    entries = []

    # (phi_1): t phi(t) increasing, t^2 phi(t) convex
    flux = _as_array(nf.flux(u))
    inc = monotone_entry("phi1.increasing", u, flux, increasing=True, strict=True)
    g = u * flux
    t0, t1, t2 = u[:-2], u[1:-1], u[2:]
    chord = g[:-2] + (g[2:] - g[:-2]) * (t1 - t0) / (t2 - t0)
    conv = inequality_entry("phi1.convex", t1, g[1:-1], chord, u, rtol=1e-9)
    entries.append(_merge("phi1", [inc, conv], "t*phi(t) increasing; t^2*phi(t) convex"))

    # (phi_2): t phi(t) -> 0 at 0+, -> infinity at infinity
    e0 = _limit_entry("phi2.zero", probe.small, nf.flux(probe.small), "zero", "lo",
                      "t*phi(t) -> 0 as t -> 0+")
    ei = _limit_entry("phi2.inf", probe.large, nf.flux(probe.large), "inf", "hi",
                      "t*phi(t) -> inf as t -> inf")
    entries.append(_merge("phi2", [e0, ei], "lim t*phi(t) = 0 at 0+, +inf at +inf"))

    # (phi_3): t^2 phi / Phi increasing and bounded below by l > 1
    ratio = _as_array(index_ratio(nf, u))
    l = float(ratio.min())
    k = int(np.argmin(ratio))
    mono = monotone_entry("phi3.increasing", u, ratio, increasing=True, rtol=1e-10)
    lower = ConditionEntry(id="phi3.lower", verdict=HOLDS if l > 1 else VIOLATED,
                           witness_t=float(u[k]), lhs=1.0, rhs=l, margin=l - 1.0,
                           grid_spec=grid_spec(u))
    e3 = _merge("phi3", [mono, lower], "t^2*phi(t)/Phi(t) increasing with infimum l > 1")
    e3.data.update({"l": l, "variation": float(ratio.max() - ratio.min())})
    entries.append(e3)

    # (phi_4) as printed
    left, middle, right = phi4_terms(nf, u)
    a = inequality_entry("phi4.left", u, left, middle, u, rtol=1e-12)
    b = inequality_entry("phi4.right", u, middle, right, u, rtol=1e-12)
    entries.append(_merge("phi4", [a, b],
                          "t^2 phi/Phi <= 1 + t phi'/phi <= 2 t^2 phi/Phi, checked as printed"))

    # (phi_5): limsup_{t->0+} Phi(t)/Phi(t/d) finite
    s = probe.small
    r5 = _as_array(nf.big_phi(s)) / _as_array(nf.big_phi(s / d))
    e5 = _limit_entry("phi5", s, r5, "bounded", "lo",
                      f"Phi(t)/Phi(t/d) bounded as t -> 0+ (d={d:g})", data={"d": d})
    entries.append(e5)

    # (phi_6): (Phi(Bt))^q / Phi(At) -> infinity, in log form
    subs = []
    for A, B, q in probe.phi6:
        tl = probe.large[probe.large * max(A, B) <= 0.999 * nf.t_guard]
        logr = q * _log_big_phi(nf, B * tl) - _log_big_phi(nf, A * tl)
        subs.append(_limit_entry(f"phi6[A={A:g},B={B:g},q={q:g}]", tl, logr, "inf", "hi",
                                 "log((Phi(Bt))^q / Phi(At)) -> inf",
                                 data={"A": A, "B": B, "q": q, "A_over_B_lt_q": A / B < q}))
    entries.append(_merge("phi6", subs, "(Phi(Bt))^q/Phi(At) -> inf for A/B < q"))

    # (phi_7): liminf Phi(t)/t^p > 0
    tl = probe.large
    log7 = _log_big_phi(nf, tl) - p * np.log(tl)
    e7 = _limit_entry("phi7", tl, log7, "positive", "hi",
                      f"Phi(t)/t^p bounded away from 0 as t -> inf (p={p:g})", data={"p": p})
    e7.data["final_ratio"] = float(np.exp(log7[-1]))
    entries.append(e7)

    # (phi_8): (Phi(Bt))^gamma / Phi(At) -> infinity as t -> 0
    subs = []
    for A, B, gam in probe.phi8:
        ts = probe.small[probe.small * max(A, B) <= nf.t_guard]
        logr = gam * _log_big_phi(nf, B * ts) - _log_big_phi(nf, A * ts)
        subs.append(_limit_entry(f"phi8[A={A:g},B={B:g},gamma={gam:g}]", ts, logr, "inf", "lo",
                                 "log((Phi(Bt))^gamma / Phi(At)) -> inf as t -> 0+",
                                 data={"A": A, "B": B, "gamma": gam}))
    entries.append(_merge("phi8", subs, "(Phi(Bt))^gamma/Phi(At) -> inf as t -> 0"))

    # Delta_2 for Phi and for Phi*
    dg = probe.mid[2 * probe.mid <= nf.t_guard]
    dres = check_delta2(nf, dg, k_max=k_max)
    entries.append(_delta2_entry("delta2", dres, "Phi(2t) <= K Phi(t)"))
    star = conjugate_nfunction(nf)
    sg = _as_array(nf.flux(dg[dg <= 0.5 * nf.t_guard]))
    sres = check_delta2(star, sg, k_max=k_max)
    entries.append(_delta2_entry("delta2*", sres, "Phi*(2s) <= K Phi*(s)"))

    grids = {"small": grid_spec(probe.small), "mid": grid_spec(probe.mid),
             "large": grid_spec(probe.large), "union": grid_spec(u)}
    return ConditionReport(entries=entries, grids=grids, nfunction=nf.to_dict())


def _delta2_entry(cid, res, note):
    return ConditionEntry(id=cid, verdict=HOLDS if res.holds else VIOLATED,
                          witness_t=res.witness, lhs=res.sup_ratio, rhs=res.k_max,
                          margin=res.k_max - res.sup_ratio, grid_spec=res.grid, note=note,
                          data={"sup_ratio": res.sup_ratio})


# ---------------------------------------------------------------------------
# Palais-Smale transform diagnostics
# ---------------------------------------------------------------------------

@dataclass
class PSTransformReport:
    t: np.ndarray
    v: np.ndarray
    g: np.ndarray
    S: np.ndarray
    l_index: float
    e3_holds: bool
    e2_holds: bool

    @property
    def S_sign(self):
        return np.sign(self.S)

    @property
    def S_nonpositive_everywhere(self):
        return bool(np.all(self.S <= 0))

    def to_dict(self):
        return _jsonable({
            "grid": grid_spec(self.t), "l_index": self.l_index,
            "e3_holds": self.e3_holds, "e2_holds": self.e2_holds,
            "e3_worst_gap": float(np.min(self.t / self.l_index - self.v)),
            "g_min": float(self.g.min()), "g_max": float(self.g.max()),
            "S_min": float(self.S.min()), "S_max": float(self.S.max()),
            "S_nonpositive_everywhere": self.S_nonpositive_everywhere,
            "S_positive_count": int(np.sum(self.S > 0)),
        })


def ps_transform_check(nf, t_grid):
    """Pointwise quantities behind the boundedness argument for (PS) sequences.

    v(t) = Phi(t)/(t phi(t)), g(t) = h(t)(1 + t phi'(t)/phi(t)), S = 1 - g.
    The bound v(t) <= t/l and 0 <= g <= 2 (i.e. |dv/dt| <= 1) are verified;
    the sign of S is only reported.
    """
    t = np.abs(_as_array(t_grid)).ravel()
    if t.size == 0 or np.any(t <= 0):
        raise DomainError("ps_transform_check grid must be positive")
    h = _as_array(h_func(nf, t))
    v = t * h
    g = h * (1.0 + t * _as_array(nf.dphi(t)) / _as_array(nf.phi(t)))
    S = 1.0 - g
    l = nf.l_index
    e3 = bool(np.all(v <= (t / l) * (1 + 1e-12)))
    e2 = bool(np.all((g >= 0) & (g <= 2)))
    return PSTransformReport(t=t, v=v, g=g, S=S, l_index=l, e3_holds=e3, e2_holds=e2)
