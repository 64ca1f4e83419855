"""Discrete energy I(u) = int Phi(|grad u|) - int F(u) on a rectangle.

Fields are nodal arrays of shape ``(nx + 1, ny + 1)`` indexed ``u[i, j]`` at
``(x_i, y_j) = (i hx, j hy)``.  The gradient is the bilinear cell-centre
gradient, integrated with the one-point rule; F is integrated with lumped
nodal weights.  With these choices the residual is the exact gradient of the
discrete energy with respect to the interior nodal values.
"""
import csv
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy import ndimage, sparse

from .errors import DomainError, OverflowGuardError

LUX_MODULAR_TOL = 1e-10
LUX_BRACKET_TOL = 1e-12
LUX_MAXITER = 400


@dataclass(frozen=True)
class Mesh:
    nx: int
    ny: int
    Lx: float = 1.0
    Ly: float = 1.0

    def __post_init__(self):
        for name in ("nx", "ny"):
            v = getattr(self, name)
            if int(v) != v or v < 1:
                raise DomainError(f"{name} must be an integer >= 1, got {v}")
            object.__setattr__(self, name, int(v))
        for name in ("Lx", "Ly"):
            v = float(getattr(self, name))
            if not v > 0:
                raise DomainError(f"{name} must be > 0, got {v}")
            object.__setattr__(self, name, v)

    def __hash__(self):
        return hash((self.nx, self.ny, self.Lx, self.Ly))

    @property
    def hx(self):
        return self.Lx / self.nx

    @property
    def hy(self):
        return self.Ly / self.ny

    @property
    def cell_area(self):
        return self.hx * self.hy

    @property
    def area(self):
        return self.Lx * self.Ly

    @property
    def diam(self):
        return float(np.hypot(self.Lx, self.Ly))

    @property
    def d(self):
        """Poincare constant: twice the diameter."""
        return 2.0 * self.diam

    @property
    def shape(self):
        return (self.nx + 1, self.ny + 1)

    @property
    def x(self):
        return np.arange(self.nx + 1) * self.hx

    @property
    def y(self):
        return np.arange(self.ny + 1) * self.hy

    def coords(self):
        """Nodal coordinate arrays X, Y of shape ``self.shape``."""
        return np.meshgrid(self.x, self.y, indexing="ij")

    @cached_property
    def weights(self):
        """Lumped nodal weights: dual-cell areas (corner 1/4, edge 1/2, interior 1)."""
        wx = np.ones(self.nx + 1)
        wy = np.ones(self.ny + 1)
        wx[[0, -1]] = 0.5
        wy[[0, -1]] = 0.5
        w = np.outer(wx, wy) * self.cell_area
        w.setflags(write=False)
        return w

    @cached_property
    def interior(self):
        m = np.zeros(self.shape, dtype=bool)
        m[1:-1, 1:-1] = True
        m.setflags(write=False)
        return m

    @property
    def n_interior(self):
        return (self.nx - 1) * (self.ny - 1)

    def zeros(self):
        return np.zeros(self.shape)

    def to_vector(self, u):
        return np.asarray(u, dtype=float)[1:-1, 1:-1].ravel()

    def from_vector(self, v):
        u = self.zeros()
        u[1:-1, 1:-1] = np.asarray(v, dtype=float).reshape(self.nx - 1, self.ny - 1)
        return u

    def to_dict(self):
        return {"nx": self.nx, "ny": self.ny, "Lx": self.Lx, "Ly": self.Ly}

    @classmethod
    def from_dict(cls, spec):
        return cls(spec["nx"], spec["ny"], spec.get("Lx", 1.0), spec.get("Ly", 1.0))


def _check_shape(mesh, u):
    u = np.asarray(u, dtype=float)
    if u.shape != mesh.shape:
        raise DomainError(f"field shape {u.shape} does not match mesh {mesh.shape}")
    return u


def enforce_dirichlet(u):
    u = np.array(u, dtype=float)
    u[0, :] = u[-1, :] = 0.0
    u[:, 0] = u[:, -1] = 0.0
    return u


def sine_field(mesh):
    """Psi = sin(pi x / Lx) sin(pi y / Ly), with exact boundary zeros."""
    X, Y = mesh.coords()
    return enforce_dirichlet(np.sin(np.pi * X / mesh.Lx) * np.sin(np.pi * Y / mesh.Ly))


def random_smooth_field(mesh, rng, sigma=2.0):
    """Gaussian-smoothed noise times the sine envelope, scaled to max |u| = 1."""
    noise = rng.standard_normal(mesh.shape)
    smooth = ndimage.gaussian_filter(noise, sigma=sigma, mode="constant")
    u = enforce_dirichlet(smooth * sine_field(mesh))
    peak = np.max(np.abs(u))
    return u / peak if peak > 0 else u


# ---------------------------------------------------------------------------
# gradient stencil
# ---------------------------------------------------------------------------

def gradient_field(mesh, u):
    """Bilinear cell-centre gradient; returns (gx, gy) of shape (nx, ny)."""
    u = _check_shape(mesh, u)
    dx = u[1:, :] - u[:-1, :]
    dy = u[:, 1:] - u[:, :-1]
    gx = (dx[:, :-1] + dx[:, 1:]) / (2 * mesh.hx)
    gy = (dy[:-1, :] + dy[1:, :]) / (2 * mesh.hy)
    return gx, gy


def gradient_norm(mesh, u):
    gx, gy = gradient_field(mesh, u)
    return np.hypot(gx, gy)


def _scatter_divergence(mesh, px, py):
    """Transpose of the gradient stencil applied to cell fluxes (px, py)."""
    r = np.zeros(mesh.shape)
    ax = px / (2 * mesh.hx)
    ay = py / (2 * mesh.hy)
    r[1:, :-1] += ax
    r[1:, 1:] += ax
    r[:-1, :-1] -= ax
    r[:-1, 1:] -= ax
    r[:-1, 1:] += ay
    r[1:, 1:] += ay
    r[:-1, :-1] -= ay
    r[1:, :-1] -= ay
    return r


def gradient_operator(mesh):
    """Sparse matrices Gx, Gy mapping raveled nodal values to cell gradients."""
    nn = (mesh.nx + 1) * (mesh.ny + 1)
    idx = np.arange(nn).reshape(mesh.shape)
    rows = np.arange(mesh.nx * mesh.ny)
    a, b = idx[:-1, :-1].ravel(), idx[1:, :-1].ravel()
    c, e = idx[:-1, 1:].ravel(), idx[1:, 1:].ravel()
    sx, sy = 1 / (2 * mesh.hx), 1 / (2 * mesh.hy)

    def build(cols, vals):
        r = np.concatenate([rows] * 4)
        return sparse.csr_matrix((np.repeat(vals, rows.size), (r, np.concatenate(cols))),
                                 shape=(rows.size, nn))

    Gx = build([b, e, a, c], np.array([sx, sx, -sx, -sx]))
    Gy = build([c, e, a, b], np.array([sy, sy, -sy, -sy]))
    return Gx, Gy


# ---------------------------------------------------------------------------
# problem and energies
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Problem:
    mesh: Mesh
    nf: object
    nl: object

    def energy(self, u):
        return total_energy(self, u)

    def residual(self, u):
        return residual(self, u)

    def modular(self, u):
        return modular_energy(self, u)

    def with_nonlinearity(self, nl):
        return Problem(self.mesh, self.nf, nl)


def modular_energy(problem, u):
    """Q(u) = sum over cells of hx hy Phi(|grad u|)."""
    mesh = problem.mesh
    g = gradient_norm(mesh, u)
    return float(mesh.cell_area * np.sum(problem.nf.big_phi(g)))


def nonlinear_energy(problem, u):
    """Lumped quadrature of int F(u)."""
    u = _check_shape(problem.mesh, u)
    return float(np.sum(problem.mesh.weights * problem.nl.F(u)))


def total_energy(problem, u):
    """I(u) = Q(u) - sum_nodes w F(u)."""
    return modular_energy(problem, u) - nonlinear_energy(problem, u)


def _cell_coefficient(nf, g):
    """phi(|grad u|) per cell, with phi(0) replaced by 0 if it is singular."""
    with np.errstate(divide="ignore", invalid="ignore"):
        c = np.asarray(nf.phi(g), dtype=float)
    return np.where(np.isfinite(c), c, 0.0)


def residual(problem, u):
    """Gradient of the discrete energy w.r.t. nodal values; boundary rows are 0."""
    mesh = problem.mesh
    u = _check_shape(mesh, u)
    gx, gy = gradient_field(mesh, u)
    c = mesh.cell_area * _cell_coefficient(problem.nf, np.hypot(gx, gy))
    r = _scatter_divergence(mesh, c * gx, c * gy)
    r -= mesh.weights * problem.nl.f(u)
    r[~mesh.interior] = 0.0
    return r


def residual_inf(problem, u):
    return float(np.max(np.abs(residual(problem, u))))


# ---------------------------------------------------------------------------
# norms and inequalities
# ---------------------------------------------------------------------------

def _modular_sum(nf, values, weights, lam):
    try:
        return float(np.sum(weights * nf.big_phi(values / lam)))
    except OverflowGuardError:
        return np.inf


def luxemburg_norm_samples(nf, values, weights):
    """inf{lam > 0 : sum w Phi(|v| / lam) <= 1} by bisection on lam."""
    v = np.abs(np.asarray(values, dtype=float)).ravel()
    w = np.broadcast_to(np.asarray(weights, dtype=float), np.shape(values)).ravel()
    keep = (v > 0) & (w > 0)
    v, w = v[keep], w[keep]
    if v.size == 0:
        return 0.0
    lo = hi = float(v.max())
    while _modular_sum(nf, v, w, hi) > 1:
        hi *= 2
    while _modular_sum(nf, v, w, lo) <= 1:
        lo /= 2
    lam = hi
    for _ in range(LUX_MAXITER):
        lam = 0.5 * (lo + hi)
        m = _modular_sum(nf, v, w, lam)
        if abs(m - 1) <= LUX_MODULAR_TOL or hi - lo < LUX_BRACKET_TOL:
            break
        if m > 1:
            lo = lam
        else:
            hi = lam
    return lam


def luxemburg_norm(problem, u, use_gradient=False):
    """Luxemburg norm of a field, or of its gradient with ``use_gradient``."""
    mesh = problem.mesh
    if use_gradient:
        g = gradient_norm(mesh, u)
        return luxemburg_norm_samples(problem.nf, g, mesh.cell_area)
    u = _check_shape(mesh, u)
    return luxemburg_norm_samples(problem.nf, u, mesh.weights)


def poincare_check(problem, u, tol=1e-3):
    """sum w Phi(|u|/d) <= Q(u) with d twice the diameter."""
    mesh = problem.mesh
    u = _check_shape(mesh, u)
    lhs = float(np.sum(mesh.weights * problem.nf.big_phi(u / mesh.d)))
    rhs = modular_energy(problem, u)
    return {"lhs": lhs, "rhs": rhs, "holds": bool(lhs <= rhs * (1 + tol)),
            "ratio": rhs / lhs if lhs > 0 else np.inf}


def embedding_check(problem, u, p, C):
    """max |u| against C Q(u)^{1/p}; diagnostic only."""
    if p <= 2:
        raise DomainError(f"embedding bound needs p > 2 in two dimensions, got {p}")
    u = _check_shape(problem.mesh, u)
    sup = float(np.max(np.abs(u)))
    bound = float(C * modular_energy(problem, u) ** (1.0 / p))
    ratio = sup / bound if bound > 0 else (0.0 if sup == 0 else np.inf)
    return {"sup_norm": sup, "bound": bound, "ratio": ratio}


# ---------------------------------------------------------------------------
# output
# ---------------------------------------------------------------------------

def write_field_csv(path, mesh, u):
    """CSV with header x,y,u; one row per node, x varying fastest."""
    u = _check_shape(mesh, u)
    x, y = mesh.x, mesh.y
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["x", "y", "u"])
        for j in range(mesh.ny + 1):
            for i in range(mesh.nx + 1):
                w.writerow([repr(float(x[i])), repr(float(y[j])), repr(float(u[i, j]))])


def read_field_csv(path, mesh):
    data = np.loadtxt(path, delimiter=",", skiprows=1)
    return data[:, 2].reshape(mesh.ny + 1, mesh.nx + 1).T.copy()
