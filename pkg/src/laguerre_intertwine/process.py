"""The N-particle non-colliding Laguerre process.

Transition density in determinantal (Karlin-McGregor) form h-transformed by
the Vandermonde, a quadrature semigroup for N <= 3, the bare sub-Markov
determinants and their duals, an Euler-Maruyama simulator for the
interacting SDE, and the exact matrix Ornstein-Uhlenbeck simulator available
at integer parameter.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import factorial
from itertools import permutations
from typing import Callable

import numpy as np

from .diffusion import _log_density_indexed, transition_density, transition_variance
from .kernels import DegenerateAnchorError, UnsupportedDimensionError, is_strict_interior, vandermonde
from .numerics import RngStream
from .rmt import radial_part


@dataclass(frozen=True)
class SemigroupParams:
    """Parameters (alpha, t, N) of the N-particle semigroup."""

    alpha: float
    t: float
    n_dim: int

    def __post_init__(self) -> None:
        if self.n_dim < 1:
            raise ValueError("N must be >= 1")
        if self.t < 0:
            raise ValueError("t must be >= 0")
        if not self.alpha > -1:
            raise ValueError("alpha must be > -1")


@dataclass(frozen=True)
class SdeConfig:
    """Euler scheme configuration: step, scheme tag, and positivity floor."""

    dt: float
    scheme: str = "euler_reordered"
    floor_eps: float = 1e-10

    def __post_init__(self) -> None:
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if self.floor_eps < 0:
            raise ValueError("floor_eps must be >= 0")
        if self.scheme != "euler_reordered":
            raise ValueError(f"unknown scheme {self.scheme!r}")


def lambda_eigen(n_dim: int) -> float:
    """Eigenvalue -N(N-1)/2 of the Vandermonde under the summed generators."""
    if n_dim < 1:
        raise ValueError("N must be >= 1")
    return -0.5 * n_dim * (n_dim - 1)


def _log_transition_matrix(alpha: float, t: float, x: np.ndarray, y: np.ndarray):
    """log p_{alpha,t}(x_i, y_j) with broadcasting; x_i > 0 required."""
    return _log_density_indexed(
        alpha, alpha if alpha > -1 else -alpha, t, x[..., :, None], y[..., None, :]
    )


def _scaled_det(log_mat: np.ndarray) -> np.ndarray:
    """Determinant of exp(log_mat) with per-row log scaling for stability."""
    row_max = np.max(log_mat, axis=-1, keepdims=True)
    det = np.linalg.det(np.exp(log_mat - row_max))
    return det * np.exp(np.sum(row_max[..., 0], axis=-1))


def km_density(alpha: float, t: float, x, y):
    """Non-colliding transition density at interior x, evaluated at y.

    exp(-lambda_N t) (Delta(y)/Delta(x)) det[p_{alpha,t}(x_i, y_j)], with the
    determinant factored row-wise in log space so small-t entries do not
    underflow.  ``y`` may carry leading batch axes.
    """
    if not t > 0:
        raise ValueError("t must be positive")
    x = np.asarray(x, dtype=float)
    if not is_strict_interior(x, nonneg=True):
        raise DegenerateAnchorError(f"anchor must be strictly interior, got {x}")
    y = np.asarray(y, dtype=float)
    if np.any(y <= 0):
        raise ValueError("y must be positive")
    n = len(x)
    det = _scaled_det(_log_transition_matrix(alpha, t, x, y))
    out = np.exp(-lambda_eigen(n) * t) * vandermonde(y) / vandermonde(x) * det
    return float(out) if np.ndim(out) == 0 else out


def subkm_density(alpha: float, t: float, x, y):
    """Bare determinant det[p_{alpha,t}(x_i, y_j)] (collision-killed law)."""
    if not t > 0:
        raise ValueError("t must be positive")
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if np.any(x <= 0) or np.any(y <= 0):
        raise ValueError("x and y must be positive")
    out = _scaled_det(_log_transition_matrix(alpha, t, x, y))
    return float(out) if np.ndim(out) == 0 else out


def subkm_dual_density(alpha: float, t: float, x, y):
    """Bare determinant det[p_hat_{alpha,t}(x_i, y_j)] of the dual family."""
    if not t > 0:
        raise ValueError("t must be positive")
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if np.any(x <= 0) or np.any(y <= 0):
        raise ValueError("x and y must be positive")
    ap = alpha + 1.0
    xb = x[..., :, None]
    yb = y[..., None, :]
    log_mat = (
        -t
        + _log_density_indexed(ap, ap if ap > -1 else -ap, t, xb, yb)
        + (yb - xb)
        - ap * (np.log(yb) - np.log(xb))
    )
    out = _scaled_det(log_mat)
    return float(out) if np.ndim(out) == 0 else out


def semigroup_ymax(alpha: float, t: float, x_top: float, n_dim: int) -> float:
    """Truncation point for semigroup quadrature boxes.

    Top-particle mean plus twelve standard deviations of the one-particle
    noncentral chi-square law, which bounds the neglected tail mass well
    below 1e-8 at desk-scale parameters.
    """
    w = -np.expm1(-t)
    mean_top = x_top * np.exp(-t) + (alpha + 1.0 + 2.0 * n_dim) * w
    var = transition_variance(alpha, t, x_top)
    return float(mean_top + 12.0 * np.sqrt(max(var, 1e-12)))


def _box_axis_nodes(alpha: float, y_max: float, panels: int, order: int):
    """Quadrature nodes on (0, y_max) for integrands with a y^alpha factor at 0.

    Non-integer alpha gets a node-clustered layer on [0, min(1, y_max/4)]
    and a plain composite rule above it; integer alpha is analytic at 0 and
    uses a single plain composite rule.
    """
    from .numerics import power_stretch, unit_gauss_legendre, unit_power_nodes

    if power_stretch(alpha) == 1.0:
        u, w = unit_gauss_legendre(panels, order)
        return y_max * u, y_max * w
    y_split = min(1.0, 0.25 * y_max)
    u0, w0 = unit_power_nodes(alpha, 1, order)
    u1, w1 = unit_gauss_legendre(panels, order)
    nodes = np.concatenate([y_split * u0, y_split + (y_max - y_split) * u1])
    wts = np.concatenate([y_split * w0, (y_max - y_split) * w1])
    return nodes, wts


def semigroup_apply_rows(
    params: SemigroupParams,
    x_rows: np.ndarray,
    f: Callable[[np.ndarray], np.ndarray],
    panels: int = 3,
    order: int = 20,
    y_max: float | None = None,
) -> np.ndarray:
    """(T_t f)(x) for a batch of anchors sharing one quadrature box.

    The chamber integral is computed as (1/N!) times the integral over the
    full box [0, y_max]^N of Delta(y) det[p(x_i, y_j)] f(sorted y): the
    prefactor is symmetric, so the symmetric extension of f makes the box
    integral N! times the chamber one.  ``f`` is evaluated once on the box
    mesh and shared across anchors.  Rows with tied coordinates return 0
    (prefactor vanishes there; callers mask them).
    """
    n = params.n_dim
    if n > 3:
        raise UnsupportedDimensionError("semigroup quadrature is guarded to N <= 3")
    x_rows = np.atleast_2d(np.asarray(x_rows, dtype=float))
    if params.t == 0:
        return f(np.sort(x_rows, axis=-1))
    if y_max is None:
        y_max = semigroup_ymax(params.alpha, params.t, float(np.max(x_rows)), n)
    nodes, wts = _box_axis_nodes(params.alpha, y_max, panels, order)
    k = nodes.size

    valid = np.all(np.diff(np.sort(x_rows, axis=-1), axis=-1) > 0, axis=-1)
    out = np.zeros(x_rows.shape[0])
    if not np.any(valid):
        return out
    rows = x_rows[valid]

    # p(x_i, node_k) for every row: shape (m, N, K)
    p = transition_density(params.alpha, params.t, rows[:, :, None], nodes[None, None, :])

    # Leibniz determinant over the N-fold node mesh
    det = None
    for perm in permutations(range(n)):
        sign = _perm_sign(perm)
        if n == 1:
            term = p[:, perm[0], :]
        elif n == 2:
            term = p[:, perm[0], :, None] * p[:, perm[1], None, :]
        else:
            term = (
                p[:, perm[0], :, None, None]
                * p[:, perm[1], None, :, None]
                * p[:, perm[2], None, None, :]
            )
        det = sign * term if det is None else det + sign * term

    mesh_axes = tuple(range(1, n + 1))
    grids = np.meshgrid(*([nodes] * n), indexing="ij")
    pts = np.stack(grids, axis=-1)
    delta = vandermonde(pts)
    wmesh = np.ones((k,) * n)
    for i in range(n):
        shape = [1] * n
        shape[i] = k
        wmesh = wmesh * wts.reshape(shape)

    fvals = np.zeros((k,) * n)
    mask = delta != 0.0
    if rows.shape[0] == 1:
        # single-anchor fast path: skip f where the integrand weight is
        # negligible (safe for bounded f; threshold far below any tolerance)
        weight = np.abs(det[0]) * np.abs(delta) * wmesh
        mask &= weight > 1e-18 * np.max(weight)
    if np.any(mask):
        fvals[mask] = f(np.sort(pts[mask], axis=-1))

    weight_mesh = (delta * fvals * wmesh)[None, ...]
    pref = np.exp(-lambda_eigen(n) * params.t) / (factorial(n) * vandermonde(rows))
    out[valid] = pref * np.sum(det * weight_mesh, axis=mesh_axes)
    return out


def _perm_sign(perm: tuple[int, ...]) -> int:
    sign = 1
    perm = list(perm)
    for i in range(len(perm)):
        for j in range(i + 1, len(perm)):
            if perm[i] > perm[j]:
                sign = -sign
    return sign


def semigroup_apply(
    params: SemigroupParams,
    x,
    f: Callable[[np.ndarray], np.ndarray],
    panels: int = 3,
    order: int = 20,
    y_max: float | None = None,
) -> float:
    """(T_t f)(x) by box quadrature; f takes (..., N) arrays of sorted rows."""
    x = np.asarray(x, dtype=float)
    if params.t == 0:
        return float(f(x[None, :])[0])
    if not is_strict_interior(x, nonneg=True):
        raise DegenerateAnchorError(f"anchor must be strictly interior, got {x}")
    return float(semigroup_apply_rows(params, x[None, :], f, panels, order, y_max)[0])


def simulate_sde(
    alpha: float,
    x0,
    t_end: float,
    cfg: SdeConfig,
    rng: RngStream,
    size: int | None = None,
):
    """Euler-Maruyama endpoint of the interacting square-root SDE.

    dX^i = sqrt(2 X^i) dB^i + (alpha + 1 - X^i + sum_{j != i} 2 X^i /
    (X^i - X^j)) dt, with per-step safeguards: the diffusion coefficient
    floors X at ``floor_eps``, negative coordinates are clamped to the
    floor after each step, near-collisions cap the interaction denominator,
    and coordinates are re-sorted ascending.  The simulator is a
    cross-check; precision comes from the exact samplers.
    """
    if not alpha > -1:
        raise ValueError("requires alpha > -1")
    x0 = np.asarray(x0, dtype=float)
    n = x0.size
    batch = 1 if size is None else size
    x = np.tile(x0, (batch, 1))
    n_steps = max(1, int(round(t_end / cfg.dt)))
    dt = t_end / n_steps
    sq_dt = np.sqrt(dt)
    eps = max(cfg.floor_eps, 1e-300)
    idx_sign = np.sign(np.arange(n)[:, None] - np.arange(n)[None, :])
    gap_floor = eps * np.where(idx_sign == 0, 1.0, idx_sign)  # rows stay sorted, so sign(i-j) is the gap sign
    off_diag = ~np.eye(n, dtype=bool)
    for _ in range(n_steps):
        if n > 1:
            gaps = x[:, :, None] - x[:, None, :]
            capped = np.where(np.abs(gaps) < eps, gap_floor[None, :, :], gaps)
            inter = np.sum(
                np.where(off_diag[None, :, :], 2.0 * x[:, :, None] / capped, 0.0), axis=2
            )
        else:
            inter = 0.0
        drift = -x + alpha + 1.0 + inter
        noise = np.sqrt(2.0 * np.maximum(x, eps)) * sq_dt * rng.gen.standard_normal(x.shape)
        x = x + drift * dt + noise
        x = np.where(x < 0, eps, x)
        x.sort(axis=1)
    return x[0] if size is None else x


def simulate_matrix_ou(
    alpha_int: int,
    x0,
    t: float,
    rng: RngStream,
    size: int | None = None,
):
    """Exact-in-law endpoint draw via the rectangular matrix OU evolution.

    Pads diag(sqrt(x0)) with alpha zero rows to an (N+alpha) x N matrix and
    applies the exact Gaussian update M_t = e^(-t/2) M_0 +
    sqrt((1 - e^-t)/2) G (real and imaginary parts of G standard normal per
    entry); returns the ordered spectrum of M_t* M_t.  The (rate, scale)
    normalization is pinned by the N = 1 agreement with the exact
    one-particle sampler.
    """
    if alpha_int < 0 or int(alpha_int) != alpha_int:
        raise ValueError("alpha must be a non-negative integer")
    if not t > 0:
        raise ValueError("t must be positive")
    x0 = np.asarray(x0, dtype=float)
    n = x0.size
    m_rows = n + int(alpha_int)
    m0 = np.zeros((m_rows, n), dtype=complex)
    m0[:n, :n] = np.diag(np.sqrt(x0))
    batch = 1 if size is None else size
    g = rng.gen.standard_normal((batch, m_rows, n)) + 1j * rng.gen.standard_normal(
        (batch, m_rows, n)
    )
    scale = np.sqrt(0.5 * -np.expm1(-t))
    mt = np.exp(-0.5 * t) * m0[None, :, :] + scale * g
    vals = radial_part(mt)
    return vals[0] if size is None else vals
