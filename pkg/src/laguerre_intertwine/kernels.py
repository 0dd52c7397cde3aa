"""Interlacing Markov kernels on Weyl chambers.

A chamber point is a plain 1-D numpy array with non-decreasing coordinates
(non-negative for the kernels carrying a parameter alpha).  The module
provides the Vandermonde determinant, membership tests for the two
interlacing windows, density evaluators and exact samplers for the five
kernels used throughout the package, and a nested-quadrature applier that
computes (kernel f)(x) for test functions f.

Kernels:

* ``corner``       -- uniform-Vandermonde kernel from dimension N+1 to N,
                      supported on the outer window x_k <= y_k <= x_{k+1};
* ``alpha_square`` -- same-dimension kernel with density proportional to
                      prod y_k^alpha / z_k^(alpha+1) times a Vandermonde
                      ratio, supported on the inner window
                      z_{k-1} <= y_k <= z_k (z_0 = 0);
* ``alpha_corner`` -- their composition from N+1 to N, with per-coordinate
                      segment integrals in closed form;
* ``hat_corner`` / ``hat_square`` -- positive (generally non-probability)
                      kernels weighting the window by the dual speed measure.

Densities are defined for strictly interior anchors and raise
:class:`DegenerateAnchorError` on ties; samplers extend continuously to tied
anchors (coordinates in zero-width windows are forced, the rest follow the
weak-limit law).
"""

from __future__ import annotations

from dataclasses import dataclass
from math import factorial
from typing import Callable

import numpy as np

from .numerics import RngStream, pochhammer, power_stretch, unit_gauss_legendre
from .rmt import sample_haar_unitary


class DegenerateAnchorError(ValueError):
    """Anchor has tied coordinates where a density requires strict interior."""


class UnsupportedDimensionError(ValueError):
    """Operation guarded to small dimensions was asked for a larger one."""


_TIE_SNAP = 1e-9


# ---------------------------------------------------------------------------
# chambers and windows
# ---------------------------------------------------------------------------

def vandermonde(y) -> np.ndarray | float:
    """Product of pairwise differences prod_{i<j} (y_j - y_i); 1 for N <= 1."""
    y = np.asarray(y, dtype=float)
    n = y.shape[-1]
    out = np.ones(y.shape[:-1])
    for i in range(n):
        for j in range(i + 1, n):
            out = out * (y[..., j] - y[..., i])
    return float(out) if out.ndim == 0 else out


def is_chamber_point(x, nonneg: bool = False) -> bool:
    """Coordinates non-decreasing, and >= 0 when ``nonneg``."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.size == 0:
        return False
    if np.any(np.diff(x) < 0):
        return False
    return not (nonneg and x[0] < 0)


def is_strict_interior(x, nonneg: bool = False) -> bool:
    """Strictly increasing, and first coordinate > 0 when ``nonneg``."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.size == 0:
        return False
    if x.size > 1 and np.any(np.diff(x) <= 0):
        return False
    return not (nonneg and x[0] <= 0)


def _require_interior(x, nonneg: bool, what: str) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if not is_strict_interior(x, nonneg=nonneg):
        raise DegenerateAnchorError(f"{what} must be strictly interior, got {x}")
    return x


@dataclass(frozen=True)
class InterlacingWindow:
    """Membership test for the outer or inner interlacing window."""

    kind: str  # "outer" | "inner"
    anchor: np.ndarray

    def contains(self, y) -> np.ndarray | bool:
        y = np.asarray(y, dtype=float)
        a = np.asarray(self.anchor, dtype=float)
        if self.kind == "outer":
            ok = np.all((a[..., :-1] <= y) & (y <= a[..., 1:]), axis=-1)
        elif self.kind == "inner":
            lo = np.concatenate([np.zeros(a.shape[:-1] + (1,)), a[..., :-1]], axis=-1)
            ok = np.all((lo <= y) & (y <= a), axis=-1)
        else:
            raise ValueError(f"unknown window kind {self.kind!r}")
        return bool(ok) if ok.ndim == 0 else ok


# ---------------------------------------------------------------------------
# density evaluators
# ---------------------------------------------------------------------------

def _corner_density_raw(x, y):
    """N! Delta_N(y)/Delta_{N+1}(x) on the outer window; no anchor checks."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    n = y.shape[-1]
    inside = np.all((x[..., :-1] <= y) & (y <= x[..., 1:]), axis=-1)
    val = factorial(n) * vandermonde(y) / vandermonde(x)
    return np.where(inside, val, 0.0)


def density_corner(x, y):
    """Density of the corner kernel at anchor x (length N+1), zero off-window."""
    x = _require_interior(x, nonneg=False, what="corner anchor")
    if len(x) < 2:
        raise ValueError("corner anchor needs at least 2 coordinates")
    out = _corner_density_raw(x, y)
    return float(out) if out.ndim == 0 else out


def _alpha_square_density_raw(alpha, z, y):
    z = np.asarray(z, dtype=float)
    y = np.asarray(y, dtype=float)
    n = y.shape[-1]
    lo = np.concatenate([np.zeros(z.shape[:-1] + (1,)), z[..., :-1]], axis=-1)
    inside = np.all((lo <= y) & (y <= z), axis=-1)
    with np.errstate(divide="ignore", invalid="ignore"):
        weight = np.prod(y**alpha, axis=-1) / np.prod(z ** (alpha + 1.0), axis=-1)
        val = pochhammer(alpha + 1.0, n) * weight * vandermonde(y) / vandermonde(z)
    return np.where(inside, val, 0.0)


def density_alpha_square(alpha: float, z, y):
    """Density of the same-dimension alpha kernel at interior anchor z."""
    if not alpha > -1:
        raise ValueError("requires alpha > -1")
    z = _require_interior(z, nonneg=True, what="alpha_square anchor")
    out = _alpha_square_density_raw(alpha, z, y)
    return float(out) if out.ndim == 0 else out


def _segment_integral(alpha: float, a, b):
    """Integral of u^(-alpha-1) over [a, b] for 0 < a; zero when a >= b.

    Closed forms: (a^-alpha - b^-alpha)/alpha away from alpha = 0 and
    log(b/a) at alpha = 0; |alpha| < 1e-8 is routed through the log branch
    with a first-order correction for the removable singularity.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    pos = b > a
    a_safe = np.where(pos, a, 1.0)
    b_safe = np.where(pos, b, 1.0)
    with np.errstate(over="ignore"):
        if abs(alpha) < 1e-8:
            log_ratio = np.log(b_safe / a_safe)
            val = log_ratio * (1.0 - 0.5 * alpha * (np.log(a_safe) + np.log(b_safe)))
        else:
            val = (a_safe**-alpha - b_safe**-alpha) / alpha
    return np.where(pos, val, 0.0)


def _alpha_corner_density_raw(alpha, x, y):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    n = y.shape[-1]
    lo = np.concatenate([np.zeros(x.shape[:-1] + (1,)), x[..., :-2]], axis=-1)
    inside = np.all((lo <= y) & (y <= x[..., 1:]), axis=-1)
    # a_k = x_k v y_k ; b_k = x_{k+1} ^ y_{k+1}, with y_{N+1} = +inf
    a_seg = np.maximum(x[..., :-1], y)
    b_seg = np.minimum(
        x[..., 1:],
        np.concatenate([y[..., 1:], np.full(y.shape[:-1] + (1,), np.inf)], axis=-1),
    )
    with np.errstate(divide="ignore", invalid="ignore"):
        seg = np.prod(y**alpha * _segment_integral(alpha, a_seg, b_seg), axis=-1)
        val = (
            factorial(n)
            * pochhammer(alpha + 1.0, n)
            * vandermonde(y)
            / vandermonde(x)
            * seg
        )
    return np.where(inside, val, 0.0)


def density_alpha_corner(alpha: float, x, y):
    """Density of the alpha corner kernel at interior anchor x (length N+1).

    Per coordinate the density carries the closed-form segment integral of
    u^(-alpha-1) between x_k v y_k and x_{k+1} ^ y_{k+1} (the last upper
    bound is x_{N+1}); the factor is zero whenever the segment is empty,
    which also enforces the ordering of y.
    """
    if not alpha > -1:
        raise ValueError("requires alpha > -1")
    x = _require_interior(x, nonneg=True, what="alpha_corner anchor")
    if len(x) < 2:
        raise ValueError("alpha_corner anchor needs at least 2 coordinates")
    out = _alpha_corner_density_raw(alpha, x, y)
    return float(out) if out.ndim == 0 else out


def _hat_weight(alpha, y):
    y = np.asarray(y, dtype=float)
    with np.errstate(divide="ignore"):
        return np.prod(np.exp(y) * y ** (-alpha - 1.0), axis=-1)


def density_hat_corner(alpha: float, x, y):
    """Positive kernel: outer-window indicator times prod e^y y^(-alpha-1)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    inside = np.all((x[..., :-1] <= y) & (y <= x[..., 1:]), axis=-1)
    out = np.where(inside, _hat_weight(alpha, y), 0.0)
    return float(out) if out.ndim == 0 else out


def density_hat_square(alpha: float, x, y):
    """Positive kernel: inner-window indicator times prod e^y y^(-alpha-1)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    lo = np.concatenate([np.zeros(x.shape[:-1] + (1,)), x[..., :-1]], axis=-1)
    inside = np.all((lo <= y) & (y <= x), axis=-1)
    out = np.where(inside, _hat_weight(alpha, y), 0.0)
    return float(out) if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# exact samplers
# ---------------------------------------------------------------------------

def sample_corner_many(x, rng: RngStream, n: int) -> np.ndarray:
    """n draws of the corner kernel via the conjugated-diagonal matrix model.

    Draws Haar U of order N+1, forms U* diag(x) U, and returns the ordered
    spectrum of the upper-left N x N corner.  Ties in x are fine.
    """
    x = np.asarray(x, dtype=float)
    if not is_chamber_point(x) or len(x) < 2:
        raise ValueError("anchor must be a chamber point with >= 2 coordinates")
    d = len(x)
    u = sample_haar_unitary(d, rng, size=n)
    uh = np.swapaxes(u, -2, -1).conj()
    m = (uh * x[None, None, :]) @ u
    corner = m[:, : d - 1, : d - 1]
    corner = 0.5 * (corner + np.swapaxes(corner, -2, -1).conj())
    return np.linalg.eigvalsh(corner)


def sample_corner(x, rng: RngStream) -> np.ndarray:
    """One draw of the corner kernel (exact, via the matrix model)."""
    return sample_corner_many(x, rng, 1)[0]


def sample_corner_rejection(x, rng: RngStream, size: int | None = None) -> np.ndarray:
    """Independent rejection sampler for the corner kernel (oracle, N <= 4).

    Proposes y_k uniform on [x_k, x_{k+1}] and accepts with probability
    Vandermonde(y) / prod_{i<j} (x_{j+1} - x_i), a valid bound on the outer
    window.
    """
    x = _require_interior(x, nonneg=False, what="rejection anchor")
    n = len(x) - 1
    if n < 1:
        raise ValueError("anchor needs at least 2 coordinates")
    if n > 4:
        raise UnsupportedDimensionError("rejection sampling is guarded to N <= 4")
    bound = 1.0
    for i in range(n):
        for j in range(i + 1, n):
            bound *= x[j + 1] - x[i]
    total = 1 if size is None else size
    out = np.empty((total, n))
    pending = np.arange(total)
    widths = np.diff(x)
    while pending.size:
        u = rng.gen.random((pending.size, n))
        y = x[:-1] + u * widths
        ratio = vandermonde(y) / bound
        accept = rng.gen.random(pending.size) < ratio
        out[pending[accept]] = y[accept]
        pending = pending[~accept]
    return out[0] if size is None else out


def _power_law_inverse_cdf(alpha: float, lo, hi, u):
    """Inverse CDF of the density ~ y^alpha on [lo, hi] (alpha > -1)."""
    ap = alpha + 1.0
    return (lo**ap + u * (hi**ap - lo**ap)) ** (1.0 / ap)


def _alpha_square_rows_interior(alpha: float, z_rows: np.ndarray, rng: RngStream) -> np.ndarray:
    """Vectorized rejection sampler; every row must be strictly interior."""
    m, n = z_rows.shape
    lo = np.concatenate([np.zeros((m, 1)), z_rows[:, :-1]], axis=1)
    denom = np.ones(m)
    for i in range(n):
        for j in range(i + 1, n):
            denom *= z_rows[:, j] - lo[:, i]
    out = np.empty((m, n))
    pending = np.arange(m)
    while pending.size:
        u = rng.gen.random((pending.size, n))
        y = _power_law_inverse_cdf(alpha, lo[pending], z_rows[pending], u)
        ratio = vandermonde(y) / denom[pending]
        accept = rng.gen.random(pending.size) < ratio
        out[pending[accept]] = y[accept]
        pending = pending[~accept]
    return out


def _alpha_square_single_tied(alpha: float, z: np.ndarray, rng: RngStream) -> np.ndarray:
    """One draw at an anchor with zero-width windows (continuous extension).

    Coordinates whose window [z_{k-1}, z_k] has zero width are forced to
    z_k; the free coordinates follow the weak-limit density, i.e. the usual
    product-power proposal weighted by all Vandermonde factors except those
    between two forced coordinates.
    """
    n = len(z)
    lo = np.concatenate([[0.0], z[:-1]])
    forced = (z - lo) == 0.0
    y = z.astype(float).copy()
    free = np.flatnonzero(~forced)
    if free.size == 0:
        return y
    pairs = [
        (i, j)
        for i in range(n)
        for j in range(i + 1, n)
        if not (forced[i] and forced[j])
    ]
    denom = 1.0
    for i, j in pairs:
        denom *= z[j] - lo[i]
    while True:
        u = rng.gen.random(free.size)
        y[free] = _power_law_inverse_cdf(alpha, lo[free], z[free], u)
        num = 1.0
        for i, j in pairs:
            num *= y[j] - y[i]
        if rng.gen.random() < num / denom:
            return y


def sample_alpha_square(alpha: float, z, rng: RngStream, size: int | None = None):
    """Exact draw(s) of the same-dimension alpha kernel anchored at z.

    Interior anchors use the vectorized rejection sampler with proposal
    density ~ y^alpha per window and bound prod_{i<j} (z_j - z_{i-1});
    anchors with ties return the forced coordinates and sample the free
    ones from the continuous extension.
    """
    if not alpha > -1:
        raise ValueError("requires alpha > -1")
    z = np.asarray(z, dtype=float)
    if not is_chamber_point(z, nonneg=True):
        raise ValueError(f"anchor must be a non-negative chamber point, got {z}")
    total = 1 if size is None else size
    if is_strict_interior(z, nonneg=True):
        out = _alpha_square_rows_interior(alpha, np.tile(z, (total, 1)), rng)
    else:
        out = np.stack([_alpha_square_single_tied(alpha, z, rng) for _ in range(total)])
    return out[0] if size is None else out


def _snap_ties(z_rows: np.ndarray, scale: float) -> np.ndarray:
    """Collapse numerically tied coordinates (and near-zero leaders) exactly."""
    tol = _TIE_SNAP * max(scale, 1.0)
    z = np.maximum(z_rows, 0.0)
    z[z[:, 0] < tol, 0] = 0.0
    for k in range(1, z.shape[1]):
        near = z[:, k] - z[:, k - 1] < tol
        z[near, k] = z[near, k - 1]
    return z


def sample_alpha_corner_rows(alpha: float, x_rows: np.ndarray, rng: RngStream) -> np.ndarray:
    """One alpha-corner draw per anchor row (anchors may differ per row).

    Used by the ensemble-projection experiments, where the anchor itself is
    random.  Ties are snapped and handled per row exactly as in
    :func:`sample_alpha_corner`.
    """
    if not alpha > -1:
        raise ValueError("requires alpha > -1")
    x_rows = np.atleast_2d(np.asarray(x_rows, dtype=float))
    total, d = x_rows.shape
    u = sample_haar_unitary(d, rng, size=total)
    uh = np.swapaxes(u, -2, -1).conj()
    m = (uh * x_rows[:, None, :]) @ u
    corner = m[:, : d - 1, : d - 1]
    corner = 0.5 * (corner + np.swapaxes(corner, -2, -1).conj())
    z_rows = _snap_ties(np.linalg.eigvalsh(corner), scale=float(np.max(x_rows)))
    n = d - 1
    lo = np.concatenate([np.zeros((total, 1)), z_rows[:, :-1]], axis=1)
    interior = np.all(z_rows - lo > 0, axis=1)
    out = np.empty((total, n))
    if np.any(interior):
        out[interior] = _alpha_square_rows_interior(alpha, z_rows[interior], rng)
    for idx in np.flatnonzero(~interior):
        out[idx] = _alpha_square_single_tied(alpha, z_rows[idx], rng)
    return out


def sample_alpha_corner(alpha: float, x, rng: RngStream, size: int | None = None):
    """Exact draw(s) of the alpha corner kernel via the two-step composition.

    Samples z from the corner kernel, then y from the same-dimension alpha
    kernel anchored at z.  Intermediate anchors are snapped to exact ties at
    relative tolerance 1e-9 so degenerate x (ties, zero head) follow the
    continuous extension rather than stalling the rejection step.
    """
    x = np.asarray(x, dtype=float)
    if not is_chamber_point(x, nonneg=True):
        raise ValueError(f"anchor must be a non-negative chamber point, got {x}")
    total = 1 if size is None else size
    out = sample_alpha_corner_rows(alpha, np.tile(x, (total, 1)), rng)
    return out[0] if size is None else out


# ---------------------------------------------------------------------------
# quadrature application
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class KernelSpec:
    """Which kernel to use, plus its parameter where one is required."""

    kind: str  # corner | alpha_square | alpha_corner | hat_corner | hat_square
    alpha: float | None = None

    def __post_init__(self) -> None:
        if self.kind not in _KERNELS:
            raise ValueError(f"unknown kernel kind {self.kind!r}")
        if self.kind != "corner" and self.alpha is None:
            raise ValueError(f"kernel {self.kind!r} needs alpha")


def _segments_corner(x):
    # coordinate i of y lives on [x_i, x_{i+1}]
    return [[(x[..., i], x[..., i + 1])] for i in range(x.shape[-1] - 1)]


def _segments_inner(z):
    zero = np.zeros(z.shape[:-1])
    return [
        [(z[..., i - 1] if i else zero, z[..., i])] for i in range(z.shape[-1])
    ]


def _segments_alpha_corner(x):
    zero = np.zeros(x.shape[:-1])
    segs = []
    for i in range(x.shape[-1] - 1):
        lo = x[..., i - 1] if i else zero
        segs.append([(lo, x[..., i]), (x[..., i], x[..., i + 1])])
    return segs


_KERNELS: dict[str, dict] = {
    "corner": {
        "density": lambda spec, x, y: _corner_density_raw(x, y),
        "segments": _segments_corner,
        "target_dim": lambda d: d - 1,
        "nonneg": False,
    },
    "alpha_square": {
        "density": lambda spec, z, y: _alpha_square_density_raw(spec.alpha, z, y),
        "segments": _segments_inner,
        "target_dim": lambda d: d,
        "nonneg": True,
    },
    "alpha_corner": {
        "density": lambda spec, x, y: _alpha_corner_density_raw(spec.alpha, x, y),
        "segments": _segments_alpha_corner,
        "target_dim": lambda d: d - 1,
        "nonneg": True,
    },
    "hat_corner": {
        "density": lambda spec, x, y: np.where(
            np.all((x[..., :-1] <= y) & (y <= x[..., 1:]), axis=-1),
            _hat_weight(spec.alpha, y),
            0.0,
        ),
        "segments": _segments_corner,
        "target_dim": lambda d: d - 1,
        "nonneg": True,
    },
    "hat_square": {
        "density": lambda spec, x, y: np.where(
            np.all(
                (np.concatenate([np.zeros(x.shape[:-1] + (1,)), x[..., :-1]], axis=-1) <= y)
                & (y <= x),
                axis=-1,
            ),
            _hat_weight(spec.alpha, y),
            0.0,
        ),
        "segments": _segments_inner,
        "target_dim": lambda d: d,
        "nonneg": True,
    },
}


def kernel_density(spec: KernelSpec, x, y):
    """Density of the chosen kernel at anchor x, evaluated at y."""
    if spec.kind == "corner":
        return density_corner(x, y)
    if spec.kind == "alpha_square":
        return density_alpha_square(spec.alpha, x, y)
    if spec.kind == "alpha_corner":
        return density_alpha_corner(spec.alpha, x, y)
    if spec.kind == "hat_corner":
        return density_hat_corner(spec.alpha, x, y)
    return density_hat_square(spec.alpha, x, y)


def kernel_target_dim(spec: KernelSpec, anchor_len: int) -> int:
    return _KERNELS[spec.kind]["target_dim"](anchor_len)


def _anchor_rows_valid(spec: KernelSpec, rows: np.ndarray) -> np.ndarray:
    if spec.kind in ("hat_corner", "hat_square"):
        return np.all(np.diff(rows, axis=-1) >= 0, axis=-1)
    ok = np.all(np.diff(rows, axis=-1) > 0, axis=-1)
    if _KERNELS[spec.kind]["nonneg"]:
        ok &= rows[..., 0] > 0
    return ok


def _endpoint_exponent(spec: KernelSpec) -> float | None:
    """Power-law exponent of the density at the zero end of the first window."""
    if spec.kind in ("alpha_square", "alpha_corner"):
        return spec.alpha
    if spec.kind == "hat_square" and -spec.alpha - 1.0 > -1.0:
        return -spec.alpha - 1.0
    return None


def apply_kernel_to_anchors(
    spec: KernelSpec,
    anchors: np.ndarray,
    f: Callable[[np.ndarray], np.ndarray],
    panels: int | tuple[int, ...] = 2,
    order: int = 20,
    chunk_elems: int = 2_000_000,
) -> np.ndarray:
    """(kernel f)(anchor) for a batch of anchors, by nested quadrature.

    ``f`` must accept an (..., N) array of chamber points (rows sorted
    ascending) and return the matching (...) array of values.  Rows with
    degenerate anchors evaluate to 0; callers pair them with vanishing
    prefactors.  ``panels`` may be a per-coordinate tuple.  Quadrature
    panels are anchored at the window segment endpoints so the integrand is
    smooth on every panel.
    """
    anchors = np.atleast_2d(np.asarray(anchors, dtype=float))
    m_total, d = anchors.shape
    n = kernel_target_dim(spec, d)
    if n < 1:
        raise ValueError("kernel target dimension must be >= 1")
    if n > 3:
        raise UnsupportedDimensionError("kernel quadrature is guarded to N <= 3")
    per_coord_panels = panels if isinstance(panels, (tuple, list)) else (panels,) * n
    density = _KERNELS[spec.kind]["density"]
    seg_fn = _KERNELS[spec.kind]["segments"]

    out = np.zeros(m_total)
    valid = _anchor_rows_valid(spec, anchors)
    if not np.any(valid):
        return out
    rows = anchors[valid]
    m = rows.shape[0]

    # per-coordinate nodes/weights, shape (m, K_i); the alpha-weighted
    # kernels carry prod y_k^alpha, which is singular (or merely
    # non-analytic) at y = 0, so their nodes come from the power map
    # y = top * v^stretch with panel edges at the v-images of the window
    # breakpoints.  This resolves the weight even when a window's lower
    # edge sits arbitrarily close to 0 (anchors from quadrature meshes do).
    exponent = _endpoint_exponent(spec)
    stretch = 1.0 if exponent is None else power_stretch(exponent)
    nodes, weights = [], []
    segs = seg_fn(rows)
    for i in range(n):
        u_plain, w_plain = unit_gauss_legendre(per_coord_panels[i], order)
        node_parts, weight_parts = [], []
        if stretch > 1.0:
            top = np.asarray(segs[i][-1][1], dtype=float)[:, None]
            edges = [np.asarray(segs[i][0][0], dtype=float)[:, None]]
            edges += [np.asarray(hi, dtype=float)[:, None] for _, hi in segs[i]]
            v_edges = [(e / top) ** (1.0 / stretch) for e in edges]
            for va, vb in zip(v_edges[:-1], v_edges[1:]):
                v = va + (vb - va) * u_plain[None, :]
                node_parts.append(top * v**stretch)
                weight_parts.append(
                    top * stretch * v ** (stretch - 1.0) * (vb - va) * w_plain[None, :]
                )
        else:
            for lo, hi in segs[i]:
                lo = np.asarray(lo, dtype=float)[:, None]
                hi = np.asarray(hi, dtype=float)[:, None]
                node_parts.append(lo + (hi - lo) * u_plain[None, :])
                weight_parts.append((hi - lo) * w_plain[None, :])
        nodes.append(np.concatenate(node_parts, axis=1))
        weights.append(np.concatenate(weight_parts, axis=1))

    sizes = [nd.shape[1] for nd in nodes]
    mesh_elems = int(np.prod(sizes))
    rows_per_chunk = max(1, chunk_elems // max(mesh_elems, 1))
    res = np.empty(m)
    for start in range(0, m, rows_per_chunk):
        sl = slice(start, min(start + rows_per_chunk, m))
        mm = sl.stop - sl.start
        grids = []
        wgrid = np.ones((mm,) + tuple(sizes))
        for i in range(n):
            shape = [mm] + [1] * n
            shape[1 + i] = sizes[i]
            grids.append(nodes[i][sl].reshape(shape))
            wgrid = wgrid * weights[i][sl].reshape(shape)
        pts = np.stack(np.broadcast_arrays(*grids), axis=-1)
        anchor_block = rows[sl].reshape((mm,) + (1,) * n + (d,))
        dens = density(spec, anchor_block, pts)
        contrib = dens * wgrid
        mask = contrib != 0.0
        vals = np.zeros_like(contrib)
        if np.any(mask):
            vals[mask] = f(np.sort(pts[mask], axis=-1))
        res[sl] = np.sum(contrib * vals, axis=tuple(range(1, n + 1)))
    out[valid] = res
    return out


def apply_kernel_quadrature(
    spec: KernelSpec,
    x,
    f: Callable[[np.ndarray], np.ndarray],
    panels: int | tuple[int, ...] = 2,
    order: int = 20,
) -> float:
    """(kernel f)(x) by nested composite Gauss-Legendre quadrature, N <= 3."""
    x = np.asarray(x, dtype=float)
    n = kernel_target_dim(spec, len(x))
    if n > 3:
        raise UnsupportedDimensionError("kernel quadrature is guarded to N <= 3")
    if spec.kind == "corner":
        _require_interior(x, nonneg=False, what="corner anchor")
    elif spec.kind in ("alpha_square", "alpha_corner"):
        _require_interior(x, nonneg=True, what=f"{spec.kind} anchor")
    return float(apply_kernel_to_anchors(spec, x[None, :], f, panels, order)[0])
