"""Shared solver pieces: configuration, results, metric and line searches."""
from dataclasses import dataclass, field, asdict
from functools import lru_cache
from typing import Optional

import numpy as np
from scipy import optimize, sparse
from scipy.sparse.linalg import splu

from .. import discretize as D
from ..errors import OverflowGuardError, ParameterError
from ..trends import _jsonable


@dataclass(frozen=True)
class Armijo:
    c: float = 1e-4
    shrink: float = 0.5
    step0: float = 1.0
    min_step: float = 1e-14


@dataclass(frozen=True)
class LambdaSweep:
    start: float = 1.0
    shrink: float = 0.5
    max_halvings: int = 20


@dataclass(frozen=True)
class SolverConfig:
    """Solver settings.

    ``tol_res`` of None means ``1e-6 (1 + |I(u0)|)`` with u0 the start of
    each run.  ``ring_radii`` is (lo, hi, n) for the log grid of modular
    radii probed by the ring estimate.  ``start_scale`` multiplies the sine
    mode to give the starting point of global minimization.
    """

    tol_res: Optional[float] = None
    max_iter: int = 5000
    armijo: Armijo = field(default_factory=Armijo)
    path_nodes: int = 31
    t_max: float = 50.0
    lambda_sweep: LambdaSweep = field(default_factory=LambdaSweep)
    seed: int = 0
    ring_samples: int = 200
    ring_radii: tuple = (1e-4, 1e2, 25)
    start_scale: float = 0.1

    def __post_init__(self):
        if isinstance(self.armijo, dict):
            object.__setattr__(self, "armijo", Armijo(**self.armijo))
        if isinstance(self.lambda_sweep, dict):
            object.__setattr__(self, "lambda_sweep", LambdaSweep(**self.lambda_sweep))
        object.__setattr__(self, "ring_radii", tuple(self.ring_radii))
        a, s = self.armijo, self.lambda_sweep
        positive = {
            "max_iter": self.max_iter, "t_max": self.t_max, "ring_samples": self.ring_samples,
            "armijo.c": a.c, "armijo.shrink": a.shrink, "armijo.step0": a.step0,
            "armijo.min_step": a.min_step, "lambda_sweep.start": s.start,
            "lambda_sweep.shrink": s.shrink, "lambda_sweep.max_halvings": s.max_halvings,
            "start_scale": self.start_scale,
        }
        if self.tol_res is not None:
            positive["tol_res"] = self.tol_res
        for name, v in positive.items():
            if not v > 0:
                raise ParameterError(f"{name} must be positive, got {v}")
        if not (a.c < 1 and a.shrink < 1 and s.shrink < 1):
            raise ParameterError("armijo.c, armijo.shrink and lambda_sweep.shrink must be < 1")
        if self.path_nodes < 3:
            raise ParameterError(f"path_nodes must be >= 3, got {self.path_nodes}")
        lo, hi, n = self.ring_radii
        if not (0 < lo < hi and n >= 1):
            raise ParameterError("ring_radii must be (lo, hi, n) with 0 < lo < hi, n >= 1")
        if self.seed < 0:
            raise ParameterError("seed must be nonnegative")

    def resolved_tol(self, energy0):
        if self.tol_res is not None:
            return self.tol_res
        return 1e-6 * (1.0 + abs(energy0))

    def radii(self):
        lo, hi, n = self.ring_radii
        return np.logspace(np.log10(lo), np.log10(hi), int(n))

    def to_dict(self):
        return _jsonable(asdict(self))


@dataclass
class Solution:
    field: np.ndarray
    energy: float
    residual_inf: float
    iterations: int
    classification: str
    trace: list
    tol_res: float
    info: dict = field(default_factory=dict)

    def report(self, mesh=None, family_spec=None, seed=None, lambda_used=None):
        out = {
            "classification": self.classification,
            "energy": self.energy,
            "residual_inf": self.residual_inf,
            "tol_res": self.tol_res,
            "iterations": self.iterations,
        }
        if lambda_used is not None:
            out["lambda_used"] = lambda_used
        out["trace"] = list(self.trace)
        if mesh is not None:
            out["mesh_spec"] = mesh.to_dict()
        if family_spec is not None:
            out["family_spec"] = family_spec
        if seed is not None:
            out["seed"] = seed
        return _jsonable(out)


# ---------------------------------------------------------------------------
# metric
# ---------------------------------------------------------------------------

@lru_cache(maxsize=8)
def _interior_gradient(mesh):
    Gx, Gy = D.gradient_operator(mesh)
    cols = np.flatnonzero(mesh.interior.ravel())
    return Gx[:, cols].tocsc(), Gy[:, cols].tocsc()


def metric_solver(problem, u):
    """Factorised variable-coefficient Laplacian  G^T diag(A phi(|grad u|)) G.

    Used as the inner product for descent directions; phi is floored so the
    matrix stays positive definite when phi vanishes (power kind, p > 2).
    """
    mesh = problem.mesh
    Gx, Gy = _interior_gradient(mesh)
    c = D._cell_coefficient(problem.nf, D.gradient_norm(mesh, u)).ravel()
    top = c.max()
    floor = 1e-3 * top if top > 0 else 1.0
    c = np.maximum(c, floor) * mesh.cell_area
    C = sparse.diags(c)
    K = (Gx.T @ C @ Gx + Gy.T @ C @ Gy).tocsc()
    lu = splu(K)
    return lu.solve


def safe_energy(problem, u):
    try:
        return D.total_energy(problem, u)
    except OverflowGuardError:
        return np.inf


def descent_direction(problem, u, r):
    """d = -K(u)^{-1} r on interior nodes, as a full field; also r . K^{-1} r."""
    mesh = problem.mesh
    rv = mesh.to_vector(r)
    dv = metric_solver(problem, u)(rv)
    return -mesh.from_vector(dv), float(rv @ dv)


def armijo_step(problem, u, energy, direction, slope, armijo, project=None):
    """Backtracking along ``direction``; returns (u_new, energy_new, step) or None.

    ``slope`` is the (negative) directional derivative.  ``project`` maps a
    trial field to the admissible set before evaluation.
    """
    alpha = armijo.step0
    while alpha >= armijo.min_step:
        trial = u + alpha * direction
        if project is not None:
            trial = project(trial)
        e = safe_energy(problem, trial)
        if e <= energy + armijo.c * alpha * slope:
            return trial, e, alpha
        alpha *= armijo.shrink
    return None


# ---------------------------------------------------------------------------
# ray maximisation
# ---------------------------------------------------------------------------

def _ray_slope(problem, v, t):
    """d/dt I(t v) = r(t v) . v; +inf-safe (overflow counts as falling energy)."""
    try:
        return float(np.sum(D.residual(problem, t * v) * v))
    except OverflowGuardError:
        return -np.inf


def ray_maximizer(problem, v, t0=1.0, grow=1.25, max_expand=200):
    """Local maximiser t* > 0 of t -> I(t v) near t0, or None if not bracketed.

    The bracket is expanded from t0 until the slope changes from + to -.
    """
    s0 = _ray_slope(problem, v, t0)
    if s0 == 0:
        return t0
    if s0 > 0:
        lo, hi = t0, t0
        for _ in range(max_expand):
            hi *= grow
            s = _ray_slope(problem, v, hi)
            if s < 0:
                break
            lo = hi
        else:
            return None
        if not np.isfinite(s):
            hi = _finite_edge(problem, v, lo, hi)
            if hi is None:
                return None
    else:
        lo, hi = t0, t0
        for _ in range(max_expand):
            lo /= grow
            s = _ray_slope(problem, v, lo)
            if s > 0:
                break
            hi = lo
        else:
            return None
    return optimize.brentq(lambda t: _ray_slope(problem, v, t), lo, hi,
                           xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)


def _finite_edge(problem, v, lo, hi):
    """Shrink ``hi`` toward ``lo`` until the slope is finite and still negative."""
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        s = _ray_slope(problem, v, mid)
        if np.isfinite(s):
            if s < 0:
                return mid
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-14 * hi:
            return None
    return None
