"""Global minimisation (coercive regime) and minimisation on a modular ball."""
import numpy as np

from .. import discretize as D
from ..errors import BoundaryMinimizerError, NonConvergenceError, OverflowGuardError
from ._common import Solution, SolverConfig, armijo_step, descent_direction, safe_energy

PROBE_T = np.logspace(-4, np.log10(0.5), 64)
BOUNDARY_RTOL = 1e-9


def small_t_probe(problem, t=PROBE_T):
    """Energies I(t v0) along the sine mode; certifies inf I < 0 when one is negative."""
    v0 = D.sine_field(problem.mesh)
    t = np.asarray(t, dtype=float)
    energies = np.array([safe_energy(problem, s * v0) for s in t])
    k = int(np.argmin(energies))
    return {"t": t, "energies": energies, "t_min": float(t[k]),
            "min_energy": float(energies[k]), "negative": bool(energies[k] < 0)}


def _descend(problem, u, cfg, tol, project=None, on_stall=None, callback=None):
    """Metric-preconditioned Armijo descent until the residual sup-norm is <= tol."""
    energy = D.total_energy(problem, u)
    trace = [energy]
    if callback is not None:
        callback(u)
    for it in range(cfg.max_iter + 1):
        r = D.residual(problem, u)
        rinf = float(np.max(np.abs(r)))
        if rinf <= tol:
            return u, energy, rinf, it, trace
        if it == cfg.max_iter:
            break
        d, rKr = descent_direction(problem, u, r)
        step = armijo_step(problem, u, energy, d, -rKr, cfg.armijo, project=project)
        if step is None:
            if on_stall is not None:
                on_stall(u, trace)
            raise NonConvergenceError(
                f"line search failed at iteration {it} (residual {rinf:.3e})", trace=trace,
                residual_inf=rinf)
        u, energy, _ = step
        trace.append(energy)
        if callback is not None:
            callback(u)
    raise NonConvergenceError(
        f"no convergence in {cfg.max_iter} iterations (residual {rinf:.3e} > {tol:.3e})",
        trace=trace, residual_inf=rinf)


def global_minimize(problem, cfg=None, u0=None, callback=None):
    """Minimise I by descent from ``u0`` (default ``start_scale`` times the sine mode).

    ``callback`` is called with every iterate.
    """
    cfg = cfg or SolverConfig()
    mesh = problem.mesh
    if u0 is None:
        u0 = cfg.start_scale * D.sine_field(mesh)
    u0 = D.enforce_dirichlet(u0)
    tol = cfg.resolved_tol(D.total_energy(problem, u0))
    u, energy, rinf, it, trace = _descend(problem, u0, cfg, tol, callback=callback)
    probe = small_t_probe(problem)
    return Solution(field=u, energy=energy, residual_inf=D.residual_inf(problem, u),
                    iterations=it, classification="global-min", trace=trace, tol_res=tol,
                    info={"probe_t_min": probe["t_min"],
                          "probe_min_energy": probe["min_energy"],
                          "probe_negative": probe["negative"]})


def scale_to_modular(problem, u, r, below=True):
    """c u with modular(c u) = r up to bisection precision (<= r if ``below``)."""
    q1 = D.modular_energy(problem, u)
    if q1 == 0:
        return u
    lo, hi = 0.0, 1.0
    if q1 < r:
        while _safe_modular(problem, hi * u) < r:
            lo, hi = hi, 2 * hi
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if _safe_modular(problem, mid * u) > r:
            hi = mid
        else:
            lo = mid
        if hi - lo <= 1e-16 * hi:
            break
    return (lo if below else hi) * u


def _safe_modular(problem, u):
    try:
        return D.modular_energy(problem, u)
    except OverflowGuardError:
        return np.inf


def local_minimize_ball(problem, r, cfg=None, u0=None, callback=None):
    """Projected descent on the modular ball {Q(u) <= r}.

    Trial points outside the ball are pulled back radially onto its boundary.
    A minimiser must be interior; if the iterates stall on the sphere a
    BoundaryMinimizerError is raised.
    """
    cfg = cfg or SolverConfig()
    if not r > 0:
        raise ValueError(f"ball radius must be positive, got {r}")
    mesh = problem.mesh
    if u0 is None:
        v0 = D.sine_field(mesh)
        probe = small_t_probe(problem, np.logspace(-4, 0, 64))
        inside = [t for t in probe["t"] if _safe_modular(problem, t * v0) < r]
        if inside:
            energies = [safe_energy(problem, t * v0) for t in inside]
            u0 = inside[int(np.argmin(energies))] * v0
        else:
            u0 = scale_to_modular(problem, v0, 0.5 * r)
    u0 = D.enforce_dirichlet(u0)
    if D.modular_energy(problem, u0) > r:
        u0 = scale_to_modular(problem, u0, r)

    def project(v):
        return v if _safe_modular(problem, v) <= r else scale_to_modular(problem, v, r)

    def on_boundary(v):
        return D.modular_energy(problem, v) >= r * (1 - BOUNDARY_RTOL)

    def stall(v, trace):
        if on_boundary(v):
            raise BoundaryMinimizerError("descent stalled on the boundary of the modular ball",
                                         trace=trace, radius=r)

    tol = cfg.resolved_tol(D.total_energy(problem, u0))
    u, energy, rinf, it, trace = _descend(problem, u0, cfg, tol, project=project,
                                          on_stall=stall, callback=callback)
    if on_boundary(u):
        raise BoundaryMinimizerError("critical point found on the boundary of the modular ball",
                                     trace=trace, radius=r)
    return Solution(field=u, energy=energy, residual_inf=D.residual_inf(problem, u),
                    iterations=it, classification="local-min", trace=trace, tol_res=tol,
                    info={"radius": r, "modular": D.modular_energy(problem, u)})
