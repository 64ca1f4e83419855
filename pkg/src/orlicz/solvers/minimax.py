"""Mountain-pass critical points by path deformation.

A discrete path of fields joins 0 to a point e with I(e) < 0.  Each
iteration moves the highest node downhill.  The move is a local-minimax step:
a preconditioned descent step followed by maximisation of I along the ray
through the trial field; if the ray has no interior maximum an ordinary
Armijo step is taken instead.  Neither kind of move raises the path maximum,
and midpoints are only inserted when they stay below it, so the recorded
maximum is non-increasing.
"""
import numpy as np

from .. import discretize as D
from ..errors import GeometryError, NonConvergenceError, OverflowGuardError
from ._common import (
    Solution,
    SolverConfig,
    armijo_step,
    descent_direction,
    ray_maximizer,
    safe_energy,
)

TIE_TOL = 1e-12
REEVEN_RATIO = 0.1
MAX_PATH_FACTOR = 4


def _quarter_min(mesh, psi):
    X, Y = mesh.coords()
    inner = ((X >= mesh.Lx / 4 - 1e-12) & (X <= 3 * mesh.Lx / 4 + 1e-12)
             & (Y >= mesh.Ly / 4 - 1e-12) & (Y <= 3 * mesh.Ly / 4 + 1e-12))
    return float(np.min(psi[inner]))


def find_e_point(problem, cfg=None, min_modular=0.0):
    """Double t from 1 until I(t Psi) < 0 (and Q(t Psi) > ``min_modular``).

    Returns e = t_e Psi with the sup of |grad Psi| (A) and the minimum of Psi
    over the centred quarter rectangle (B).
    """
    cfg = cfg or SolverConfig()
    mesh = problem.mesh
    psi = D.sine_field(mesh)
    A = float(np.max(D.gradient_norm(mesh, psi)))
    B = _quarter_min(mesh, psi)
    profile = []
    t = 1.0
    while t <= cfg.t_max:
        try:
            e_val = D.total_energy(problem, t * psi)
            q_val = D.modular_energy(problem, t * psi)
        except OverflowGuardError:
            profile.append((t, None))
            break
        profile.append((t, e_val))
        if e_val < 0 and q_val > min_modular:
            return {"e": t * psi, "t_e": t, "A": A, "B": B, "energy": e_val,
                    "profile": profile}
        t *= 2
    raise GeometryError(
        f"no t <= {cfg.t_max} with I(t Psi) < 0; profile {profile}", trace=[], profile=profile)


def _top(energies):
    emax = max(energies)
    for k, e in enumerate(energies):
        if e >= emax - TIE_TOL * max(1.0, abs(emax)):
            return k, emax


def _move(problem, w, energy, cfg):
    """One downhill move of a path node; returns (new field, new energy) or None."""
    r = D.residual(problem, w)
    d, rKr = descent_direction(problem, w, r)
    a = cfg.armijo
    alpha = a.step0
    while alpha >= a.min_step:
        trial = w + alpha * d
        t_star = None
        if np.any(trial):
            try:
                t_star = ray_maximizer(problem, trial)
            except (ValueError, OverflowGuardError):
                t_star = None
        if t_star is not None:
            cand = t_star * trial
            e = safe_energy(problem, cand)
            if e <= energy - a.c * alpha * rKr:
                return cand, e, "minimax"
        alpha *= a.shrink
    step = armijo_step(problem, w, energy, d, -rKr, a)
    if step is None:
        return None
    return step[0], step[1], "descent"


def mountain_pass(problem, cfg=None, e=None, min_modular=0.0):
    """Path-deformation search for a mountain-pass critical point with I > 0."""
    cfg = cfg or SolverConfig()
    if e is None:
        e = find_e_point(problem, cfg, min_modular=min_modular)["e"]
    P = cfg.path_nodes
    path = [s * e for s in np.linspace(0.0, 1.0, P)]
    energies = [D.total_energy(problem, g) for g in path]
    if not (energies[-1] < 0 < max(energies)):
        raise GeometryError("endpoint energy must be negative and the path must rise above 0",
                            trace=[], endpoint_energy=energies[-1])

    # start from the maximiser of I along the initial segment
    k, _ = _top(energies)
    if 0 < k < len(path) - 1:
        t_star = ray_maximizer(problem, path[k])
        if t_star is not None:
            cand = t_star * path[k]
            e_c = safe_energy(problem, cand)
            if e_c >= energies[k]:
                path[k], energies[k] = cand, e_c

    tol = cfg.resolved_tol(max(energies))
    trace = []
    moves = {"minimax": 0, "descent": 0, "inserted": 0}
    endpoints = (path[0].copy(), path[-1].copy())
    for it in range(cfg.max_iter + 1):
        k, emax = _top(energies)
        if k == 0 or k == len(path) - 1:
            raise GeometryError("path collapse: maximum reached an endpoint", trace=trace)
        trace.append(emax)
        w = path[k]
        rinf = D.residual_inf(problem, w)
        if rinf <= tol:
            break
        if it == cfg.max_iter:
            raise NonConvergenceError(
                f"no convergence in {cfg.max_iter} iterations (residual {rinf:.3e} > {tol:.3e})",
                trace=trace, residual_inf=rinf)
        moved = _move(problem, w, energies[k], cfg)
        if moved is None:
            raise NonConvergenceError(f"line search failed at iteration {it}", trace=trace,
                                      residual_inf=rinf)
        path[k], energies[k], kind = moved
        moves[kind] += 1
        moves["inserted"] += _reeven(problem, path, energies, k, emax, P)
    if not energies[k] > 0:
        raise GeometryError(f"critical point has energy {energies[k]:.3e} <= 0", trace=trace)
    assert np.array_equal(path[0], endpoints[0]) and np.array_equal(path[-1], endpoints[1])
    return Solution(field=w, energy=energies[k], residual_inf=rinf, iterations=it,
                    classification="mountain-pass", trace=trace, tol_res=tol,
                    info={"path_energies": list(energies), "path_length": len(path),
                          "node": k, "moves": moves, "path_max": max(energies),
                          "path": path})


def _reeven(problem, path, energies, k, level, P):
    """Insert energy midpoints next to node k where neighbours differ by > 10%."""
    scale = REEVEN_RATIO * abs(level)
    added = 0
    for a in (k, k - 1):
        if len(path) >= MAX_PATH_FACTOR * P:
            break
        b = a + 1
        if a < 0 or b >= len(path):
            continue
        if abs(energies[a] - energies[b]) <= scale:
            continue
        mid = 0.5 * (path[a] + path[b])
        e_mid = safe_energy(problem, mid)
        if e_mid <= level:
            path.insert(b, mid)
            energies.insert(b, e_mid)
            added += 1
    return added
