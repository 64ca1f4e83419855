"""Two solutions for concave-convex reactions: a local minimum and a mountain pass."""
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .. import discretize as D
from ..errors import BoundaryMinimizerError, GeometryError, ParameterError
from ..nonlinearity import with_lambda
from ._common import Solution, SolverConfig
from .minimize import local_minimize_ball
from .minimax import mountain_pass

SCALE_BISECT_ITERS = 60


def ring_fields(mesh, n, seed):
    """The sine mode followed by ``n - 1`` seeded random smooth Dirichlet fields."""
    rng = np.random.default_rng(seed)
    fields = [D.sine_field(mesh)]
    fields += [D.random_smooth_field(mesh, rng) for _ in range(n - 1)]
    return np.stack(fields)


def _modular_batch(nf, grad_norms, c, area):
    """Q(c_i v_i) for a batch; overflow maps to +inf."""
    arg = c[:, None] * grad_norms
    out = np.full(c.shape, np.inf)
    ok = np.max(arg, axis=1) <= nf.t_guard
    if ok.any():
        out[ok] = area * np.sum(nf.big_phi(arg[ok]), axis=1)
    return out


def _scales_for_modular(nf, grad_norms, area, r):
    """Per-field c with Q(c v) = r, by bisection on log c (lower bracket kept)."""
    n = grad_norms.shape[0]
    lo = np.full(n, -40.0)
    hi = np.zeros(n)
    short = _modular_batch(nf, grad_norms, np.exp(hi), area) < r
    while short.any():
        lo[short] = hi[short]
        hi[short] += 2.0
        short = _modular_batch(nf, grad_norms, np.exp(hi), area) < r
    for _ in range(SCALE_BISECT_ITERS):
        mid = 0.5 * (lo + hi)
        above = _modular_batch(nf, grad_norms, np.exp(mid), area) > r
        hi = np.where(above, mid, hi)
        lo = np.where(above, lo, mid)
    return np.exp(lo)


@lru_cache(maxsize=4)
def _ring_samples(mesh, nf, n, seed, radii):
    """Sample fields and, per radius, the scales putting them on that sphere.

    Independent of the nonlinearity, so a lambda sweep reuses it.
    """
    fields = ring_fields(mesh, n, seed)
    grads = np.stack([D.gradient_norm(mesh, v).ravel() for v in fields])
    scales = np.stack([_scales_for_modular(nf, grads, mesh.cell_area, r) for r in radii])
    fields.setflags(write=False)
    scales.setflags(write=False)
    return fields, scales


def estimate_mp_ring(problem, cfg=None):
    """Monte Carlo surrogate for a modular sphere on which I stays positive.

    For each radius r on a log grid the sampled fields are rescaled to
    modular r and rho(r) = min I over the sample.  Returns the best radius.
    """
    cfg = cfg or SolverConfig()
    mesh = problem.mesh
    radii = cfg.radii()
    fields, scales = _ring_samples(mesh, problem.nf, cfg.ring_samples, cfg.seed,
                                   tuple(radii.tolist()))
    rho = np.empty(radii.size)
    for i, r in enumerate(radii):
        # modular of the rescaled fields is r up to the bisection tolerance
        energies = [D.total_energy(problem, c * v) for c, v in zip(scales[i], fields)]
        rho[i] = float(np.min(energies))
    k = int(np.argmax(rho))
    return {"r": float(radii[k]), "rho": float(rho[k]), "lambda_ok": bool(rho[k] > 0),
            "radii": radii.tolist(), "rho_profile": rho.tolist(), "seed": cfg.seed,
            "samples": cfg.ring_samples}


@dataclass
class PairResult:
    u_min: Solution
    w_mp: Solution
    lambda_used: float
    ring: dict
    sweep: list

    @property
    def separation(self):
        return float(np.max(np.abs(self.u_min.field - self.w_mp.field)))


def solve_pair(problem, cfg, ring=None):
    """Local minimiser in the ring's ball and a mountain pass beyond it."""
    ring = ring or estimate_mp_ring(problem, cfg)
    if not ring["lambda_ok"]:
        raise GeometryError("no modular sphere with positive sampled energy", trace=[],
                            ring=ring)
    u_min = local_minimize_ball(problem, ring["r"], cfg)
    w_mp = mountain_pass(problem, cfg, min_modular=ring["r"])
    if not (u_min.energy < 0 < w_mp.energy):
        raise GeometryError(
            f"energy ordering failed: I(u_min)={u_min.energy:.3e}, I(w_mp)={w_mp.energy:.3e}",
            trace=[])
    return u_min, w_mp, ring


def concave_convex(problem, cfg=None):
    """Halve lambda from ``lambda_sweep.start`` until the ring test passes, then solve."""
    cfg = cfg or SolverConfig()
    if problem.nl.family != "concave_convex":
        raise ParameterError("concave_convex needs the concave_convex family")
    sweep = cfg.lambda_sweep
    lam = sweep.start
    history = []
    for _ in range(sweep.max_halvings + 1):
        prob = problem.with_nonlinearity(with_lambda(problem.nl, lam))
        ring = estimate_mp_ring(prob, cfg)
        entry = {"lambda": lam, "r": ring["r"], "rho": ring["rho"],
                 "lambda_ok": ring["lambda_ok"]}
        history.append(entry)
        if ring["lambda_ok"]:
            # a sampled ring can be optimistic; a geometric failure of the pair
            # search counts as "lambda not small enough" and the sweep goes on
            try:
                u_min, w_mp, ring = solve_pair(prob, cfg, ring)
            except (GeometryError, BoundaryMinimizerError) as exc:
                entry["pair_error"] = f"{type(exc).__name__}: {exc}"
            else:
                return PairResult(u_min=u_min, w_mp=w_mp, lambda_used=lam, ring=ring,
                                  sweep=history)
        lam *= sweep.shrink
    raise GeometryError(f"lambda sweep exhausted after {sweep.max_halvings} halvings",
                        trace=[], sweep=history)
