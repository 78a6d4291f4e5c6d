"""Outer stream-function operator: Nystrom assembly and bordered solves.

The outer flow is a single layer on the section boundary for the
axisymmetric stream-function operator.  In blown-up coordinates the kernel
in the angle variables is

    K(alpha, alpha~) = m(alpha~) (s2 / 2 pi) F(eps^2 s1 / s2^2),

    s1 = |chi(alpha) - chi(alpha~)|^2,
    s2 = sqrt((1 + eps chi_1(alpha)) (1 + eps chi_1(alpha~))),

with F the elliptic ring profile (see ``special``).  Writing
F = p + q log s and splitting the chordal log via

    log s1 = log(4 sin^2((alpha-alpha~)/2)) + log Q,
    Q = 1 + theta + theta~ + theta theta~ + (theta-theta~)^2 / |y-y~|^2,

puts the kernel in the product-quadrature form A log(4 sin^2) + B with A, B
smooth and periodic, so the trapezoid weights for B and the spectral log
weights for A integrate trigonometric densities of degree < n/2 exactly.
On the diagonal Q -> m^2.

The eps -> 0 limit kernel is -(m(alpha~)/2 pi) log |chi - chi~|, assembled
by the same split with A = -m/(4 pi) exactly.

Both operators are used through bordered (n+1) systems that append the
unknown constant (capacity constant or flux constant gamma) and the
circulation row sum m mu = 1.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .shape import BoundaryGrid
from .special import f_elliptic, f_split

__all__ = [
    "kress_log_weights",
    "assemble_full",
    "assemble_limit",
    "kernel_direct",
    "CapacitySolution",
    "OuterSolution",
    "solve_capacity",
    "solve_outer",
    "w_from_s",
    "s_from_w",
    "eval_streamfunction",
]

_LOG8 = 3.0 * np.log(2.0)


@lru_cache(maxsize=8)
def kress_log_weights(n: int) -> np.ndarray:
    """Circulant quadrature weights for the log(4 sin^2((a-a~)/2)) factor.

    Returns R with int log(4 sin^2((alpha_i - a~)/2)) f(a~) da~
    ~ sum_j R[(i-j) mod n] f(alpha_j), exact for trigonometric polynomials
    of degree < n/2 (the m-th harmonic integrates to -2 pi / m).
    """
    if n % 2:
        raise ValueError("n must be even")
    k = np.arange(n)
    m = np.arange(1, n // 2)
    r = -(4.0 * np.pi / n) * np.cos(2.0 * np.pi * np.outer(k, m) / n) @ (1.0 / m)
    r -= (4.0 * np.pi / n**2) * (-1.0) ** k
    return r


def _pair_geometry(grid: BoundaryGrid):
    chi = grid.chi
    d = chi[:, None, :] - chi[None, :, :]
    s1 = np.einsum("ijk,ijk->ij", d, d)
    radial = 1.0 + grid.eps * chi[:, 0]
    s2 = np.sqrt(np.outer(radial, radial))
    return s1, s2


def _chord_sq(alpha: np.ndarray) -> np.ndarray:
    # 4 sin^2((alpha_i - alpha_j)/2) with exact zeros on the diagonal
    half = 0.5 * (alpha[:, None] - alpha[None, :])
    return 4.0 * np.sin(half) ** 2


def _log_ratio(grid: BoundaryGrid, s1: np.ndarray) -> np.ndarray:
    # log Q = log(s1 / 4 sin^2) continued to 2 log m on the diagonal
    n = grid.n
    chord = _chord_sq(grid.alpha)
    q = np.empty((n, n))
    off = ~np.eye(n, dtype=bool)
    q[off] = s1[off] / chord[off]
    q[np.eye(n, dtype=bool)] = grid.m**2
    return np.log(q)


def assemble_full(grid: BoundaryGrid, s_max: float = 1.0) -> np.ndarray:
    """Nystrom matrix of the eps > 0 stream-function operator.

    Entries combine the smooth part B on trapezoid weights with the log
    part A on the spectral log weights:

        M[i, j] = A[i, j] R[i-j] + (2 pi / n) B[i, j],
        A = m s2 / (2 pi) q(s),      s = eps^2 s1 / s2^2,
        B = m s2 / (2 pi) (p(s) + q(s) log(eps^2 Q / s2^2)),

    which reproduces the kernel exactly since
    A log(4 sin^2) + B = m s2/(2 pi) (p + q log s).  Pairs pushed beyond
    the series range of the split (possible only at eps of order one) fall
    back to plain trapezoid on the elliptic evaluation; if that happens
    inside the near-diagonal zone, where the log split is structurally
    required, a ValueError is raised.
    """
    if grid.eps <= 0.0:
        raise ValueError("assemble_full requires eps > 0; use assemble_limit")
    n = grid.n
    s1, s2 = _pair_geometry(grid)
    s = grid.eps**2 * s1 / s2**2
    log_q = _log_ratio(grid, s1)
    pref = grid.m[None, :] * s2 / (2.0 * np.pi)
    log_eps_term = 2.0 * np.log(grid.eps) + log_q - 2.0 * np.log(s2)

    a = np.empty((n, n))
    b = np.empty((n, n))
    inside = s <= s_max
    p_in, q_in = f_split(s[inside], s_max=s_max)
    a[inside] = (pref * 1.0)[inside] * q_in
    b[inside] = pref[inside] * (p_in + q_in * log_eps_term[inside])
    if not np.all(inside):
        chord = _chord_sq(grid.alpha)
        near = chord < 0.5
        if np.any(~inside & near):
            raise ValueError(
                "kernel argument left the log-split range near the diagonal; "
                "eps too large for this section")
        far = ~inside
        a[far] = 0.0
        b[far] = pref[far] * f_elliptic(s[far])

    r = kress_log_weights(n)
    idx = (np.arange(n)[:, None] - np.arange(n)[None, :]) % n
    return a * r[idx] + (2.0 * np.pi / n) * b


def assemble_limit(grid: BoundaryGrid) -> np.ndarray:
    """Nystrom matrix of the eps -> 0 limit operator -(m/2 pi) log |chi - chi~|.

    The log-weight factor is A = -m(alpha~)/(4 pi) exactly; the smooth part
    is -(m/4 pi) log Q with diagonal -(m/2 pi) log m.
    """
    n = grid.n
    s1, _ = _pair_geometry(grid)
    log_q = _log_ratio(grid, s1)
    a = np.tile(-grid.m / (4.0 * np.pi), (n, 1))
    b = a * log_q
    r = kress_log_weights(n)
    idx = (np.arange(n)[:, None] - np.arange(n)[None, :]) % n
    return a * r[idx] + (2.0 * np.pi / n) * b


def kernel_direct(grid: BoundaryGrid) -> np.ndarray:
    """Pointwise kernel values m s2/(2 pi) F(eps^2 s1/s2^2), elliptic path.

    Off-diagonal only (the diagonal is logarithmically singular); used as
    the independent check of the assembled A log(4 sin^2) + B split.
    """
    n = grid.n
    s1, s2 = _pair_geometry(grid)
    s = grid.eps**2 * s1 / s2**2
    out = np.empty((n, n))
    off = ~np.eye(n, dtype=bool)
    out[off] = (grid.m[None, :] * s2 / (2.0 * np.pi))[off] * f_elliptic(s[off])
    out[np.eye(n, dtype=bool)] = np.nan
    return out


@dataclass(frozen=True)
class CapacitySolution:
    mu: np.ndarray
    const: float


@dataclass(frozen=True)
class OuterSolution:
    mu: np.ndarray
    gamma: float
    w: float


def _bordered_solve(grid: BoundaryGrid, mat: np.ndarray, rhs: np.ndarray):
    n = grid.n
    sys_mat = np.empty((n + 1, n + 1))
    sys_mat[:n, :n] = mat
    sys_mat[:n, n] = -1.0
    sys_mat[n, :n] = grid.m * grid.weight
    sys_mat[n, n] = 0.0
    full_rhs = np.concatenate([rhs, [1.0]])
    sol = np.linalg.solve(sys_mat, full_rhs)
    return sol[:n], float(sol[n])


def solve_capacity(grid: BoundaryGrid, mat: np.ndarray | None = None) -> CapacitySolution:
    """Capacity density: K mu = const with unit weighted mass.

    Solves the bordered system [K, -1; m w, 0] (mu, const) = (0, 1) on the
    limit operator.  At theta = 0 the density is 1/(2 pi) and const = 0;
    for small shapes |const| = O(||theta||^2).
    """
    if mat is None:
        mat = assemble_limit(grid)
    mu, const = _bordered_solve(grid, mat, np.zeros(grid.n))
    return CapacitySolution(mu=mu, const=const)


def solve_outer(grid: BoundaryGrid, w: float, mat: np.ndarray | None = None) -> OuterSolution:
    """Outer layer density for ring speed w.

    Boundary data (w/2)(1 + eps chi_1)^2 together with unit circulation
    int m mu dalpha = 1; the unknown flux constant gamma rides along in the
    bordered column.  (mu, gamma) is affine in w since only the right side
    depends on it.
    """
    if mat is None:
        mat = assemble_full(grid)
    rhs = 0.5 * w * (1.0 + grid.eps * grid.chi[:, 0]) ** 2
    mu, gamma = _bordered_solve(grid, mat, rhs)
    return OuterSolution(mu=mu, gamma=gamma, w=float(w))


def w_from_s(eps: float, s: float) -> float:
    """Ring speed from the affine speed coordinate S."""
    return (_LOG8 - 0.5 + np.log(1.0 / eps)) / (4.0 * np.pi) + 0.5 * s


def s_from_w(eps: float, w: float) -> float:
    """Affine speed coordinate S from the ring speed (exact inverse of w_from_s)."""
    return 2.0 * (w - (_LOG8 - 0.5 + np.log(1.0 / eps)) / (4.0 * np.pi))


def eval_streamfunction(grid: BoundaryGrid, mu: np.ndarray,
                        points: np.ndarray) -> np.ndarray:
    """Single-layer stream function at off-boundary points, plain trapezoid.

    The quadrature is spectrally accurate away from the layer but loses all
    accuracy within a few grid spacings of it; a warning is emitted when
    any requested point sits closer than five spacings.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    d = pts[:, None, :] - grid.chi[None, :, :]
    dist_sq = np.einsum("ijk,ijk->ij", d, d)
    min_dist = np.sqrt(np.min(dist_sq))
    spacing = 2.0 * np.pi * np.max(grid.m) / grid.n
    if min_dist < 5.0 * spacing:
        warnings.warn(
            f"evaluation point within {min_dist:.3g} of the layer; trapezoid "
            "accuracy degrades inside ~5 grid spacings", stacklevel=2)
    radial_pt = 1.0 + grid.eps * pts[:, 0]
    radial_src = 1.0 + grid.eps * grid.chi[:, 0]
    s2 = np.sqrt(np.outer(radial_pt, radial_src))
    s = grid.eps**2 * dist_sq / s2**2
    vals = s2 / (2.0 * np.pi) * f_elliptic(s.ravel()).reshape(s.shape)
    out = vals @ (grid.m * mu) * grid.weight
    return out if np.asarray(points).ndim > 1 else float(out[0])