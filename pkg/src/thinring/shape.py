"""Cross-section geometry: cosine-series shapes and boundary grids.

The cross-section boundary is the polar graph r = 1 + theta(alpha) over the
unit circle, theta even in the symmetry axis, parametrized by a finite cosine
series

    theta(alpha) = sum_{l=0}^{M} a_l cos(l alpha).

``build_grid`` evaluates everything the integral operators need on a uniform
angular grid: the boundary chart chi(alpha) = (1+theta) (cos alpha, sin
alpha), the metric m = sqrt(theta'^2 + (1+theta)^2), the outward normal, the
in-plane curvature and the full mean-curvature factor

    h = kappa + eps (n . e1) / (1 + eps chi_1),

which is what multiplies the surface tension in the pressure jump.  The
admissible set is pinned by two geometric constraints, area pi and vanishing
first moment, enforced on the (a_0, a_1) pair by ``project_constraints``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "FourierShape",
    "BoundaryGrid",
    "GeometryError",
    "ProjectionError",
    "build_grid",
    "area",
    "moment_x1",
    "project_constraints",
    "sobolev_norm",
    "cosine_coeffs",
    "resample_trig",
]


class GeometryError(ValueError):
    """Raised when a shape/eps pair leaves the admissible chart."""


class ProjectionError(RuntimeError):
    """Raised when the (a_0, a_1) constraint projection fails to converge."""


@dataclass(frozen=True)
class FourierShape:
    """Even cross-section profile theta = sum a_l cos(l alpha)."""

    coeffs: np.ndarray

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.coeffs, dtype=float))
        if c.ndim != 1 or c.size == 0:
            raise ValueError("coeffs must be a nonempty 1-d array")
        c = c.copy()
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @property
    def modes(self) -> int:
        return self.coeffs.size - 1

    def theta(self, alpha: np.ndarray) -> np.ndarray:
        l = np.arange(self.coeffs.size)
        return np.cos(np.multiply.outer(np.asarray(alpha, float), l)) @ self.coeffs

    def dtheta(self, alpha: np.ndarray) -> np.ndarray:
        l = np.arange(self.coeffs.size)
        return -np.sin(np.multiply.outer(np.asarray(alpha, float), l)) @ (l * self.coeffs)

    def ddtheta(self, alpha: np.ndarray) -> np.ndarray:
        l = np.arange(self.coeffs.size)
        return -np.cos(np.multiply.outer(np.asarray(alpha, float), l)) @ (l * l * self.coeffs)

    def with_coeffs(self, **updates: float) -> "FourierShape":
        """Copy with individual modes replaced, e.g. with_coeffs(a0=..., a1=...)."""
        c = np.array(self.coeffs)
        for key, val in updates.items():
            if not key.startswith("a"):
                raise KeyError(key)
            c[int(key[1:])] = val
        return FourierShape(c)

    def sup_norm(self) -> float:
        alpha = np.linspace(0.0, np.pi, 8 * self.coeffs.size + 16)
        return float(np.max(np.abs(self.theta(alpha))))


@dataclass(frozen=True)
class BoundaryGrid:
    """Uniform-in-alpha trace of the geometry at one (shape, eps)."""

    alpha: np.ndarray
    theta: np.ndarray
    dtheta: np.ndarray
    ddtheta: np.ndarray
    m: np.ndarray          # metric factor |chi'|
    chi: np.ndarray        # boundary points, shape (n, 2)
    normal: np.ndarray     # outward unit normal at chi, shape (n, 2)
    kappa: np.ndarray      # in-plane curvature of the cross-section
    h: np.ndarray          # kappa + eps (n.e1)/(1 + eps chi_1)
    eps: float
    shape: FourierShape

    @property
    def n(self) -> int:
        return self.alpha.size

    @property
    def weight(self) -> float:
        """Trapezoid weight of the uniform grid (exact for trig polynomials)."""
        return 2.0 * np.pi / self.n


def build_grid(shape: FourierShape, eps: float, n: int) -> BoundaryGrid:
    """Sample the boundary geometry on n uniform angles.

    Derivatives of theta are evaluated by exact differentiation of the
    cosine series.  Raises GeometryError if the polar graph degenerates
    (1 + theta <= 0), the torus embedding fails (eps (1 + sup theta) >= 1),
    or n < 4 (modes + 1) undersamples the quadratures.
    """
    if eps < 0.0:
        raise GeometryError(f"eps must be nonnegative, got {eps}")
    if n < 4 * (shape.modes + 1):
        raise GeometryError(
            f"n = {n} undersamples an M = {shape.modes} shape; need n >= {4 * (shape.modes + 1)}")
    alpha = 2.0 * np.pi * np.arange(n) / n
    th = shape.theta(alpha)
    dth = shape.dtheta(alpha)
    ddth = shape.ddtheta(alpha)
    r = 1.0 + th
    if np.min(r) <= 0.0:
        raise GeometryError("polar graph degenerate: 1 + theta <= 0")
    if eps * (1.0 + np.max(np.abs(th))) >= 1.0:
        raise GeometryError("eps (1 + sup|theta|) >= 1: section touches the axis")

    m = np.hypot(dth, r)
    ca, sa = np.cos(alpha), np.sin(alpha)
    chi = np.stack([r * ca, r * sa], axis=1)
    # outward normal of the polar graph: ((1+theta) X - theta' X_perp)/m
    normal = np.stack([(r * ca + dth * sa) / m, (r * sa - dth * ca) / m], axis=1)
    kappa = (r * r + 2.0 * dth * dth - r * ddth) / m**3
    h = kappa + eps * (r * ca + dth * sa) / (m * (1.0 + eps * r * ca))
    return BoundaryGrid(alpha=alpha, theta=th, dtheta=dth, ddtheta=ddth, m=m,
                        chi=chi, normal=normal, kappa=kappa, h=h,
                        eps=float(eps), shape=shape)


def _uniform_samples(shape: FourierShape, factor: int = 4):
    n = factor * (shape.modes + 2)
    alpha = 2.0 * np.pi * np.arange(n) / n
    return alpha, shape.theta(alpha), n


def area(shape: FourierShape) -> float:
    """Cross-section area (1/2) int (1+theta)^2 d alpha.

    Trapezoid on >= 4(M+2) angles, exact for the degree-2M integrand.
    """
    _, th, n = _uniform_samples(shape)
    return float(0.5 * np.sum((1.0 + th) ** 2) * 2.0 * np.pi / n)


def moment_x1(shape: FourierShape) -> float:
    """First moment int_Omega y_1 dy = (1/3) int (1+theta)^3 cos alpha d alpha."""
    alpha, th, n = _uniform_samples(shape)
    return float(np.sum((1.0 + th) ** 3 * np.cos(alpha)) / 3.0 * 2.0 * np.pi / n)


def project_constraints(shape: FourierShape, tol: float = 1e-12,
                        max_iter: int = 20) -> FourierShape:
    """Slave (a_0, a_1) to the geometric constraints area = pi, moment = 0.

    Higher modes are untouched.  Newton iteration on the 2x2 system; the
    Jacobian d(area)/d a_0 = 2 pi (1 + a_0) + ..., d(moment)/d a_1 ~ pi
    is well conditioned for admissible shapes.
    """
    cur = shape
    for _ in range(max_iter):
        g1 = area(cur) - np.pi
        g2 = moment_x1(cur)
        if abs(g1) <= tol and abs(g2) <= tol:
            return cur
        # finite-difference 2x2 Jacobian in (a_0, a_1); cheap and robust
        step = 1e-7
        c = np.array(cur.coeffs)
        if c.size < 2:
            c = np.concatenate([c, [0.0]])
            cur = FourierShape(c)
        sp0 = cur.with_coeffs(a0=c[0] + step)
        sp1 = cur.with_coeffs(a1=c[1] + step)
        j = np.array([
            [(area(sp0) - (g1 + np.pi)) / step, (area(sp1) - (g1 + np.pi)) / step],
            [(moment_x1(sp0) - g2) / step, (moment_x1(sp1) - g2) / step],
        ])
        try:
            delta = np.linalg.solve(j, [g1, g2])
        except np.linalg.LinAlgError as exc:
            raise ProjectionError("constraint Jacobian singular") from exc
        cur = cur.with_coeffs(a0=c[0] - delta[0], a1=c[1] - delta[1])
    raise ProjectionError(
        f"no convergence in {max_iter} iterations: area defect {g1:.3e}, moment {g2:.3e}")


def sobolev_norm(shape: FourierShape, k: int = 5) -> float:
    """H^k norm of theta on the circle from its cosine coefficients.

    norm^2 = 2 pi a_0^2 + pi sum_{l>=1} (1+l)^{2k} a_l^2, so a single mode
    theta = cos(2 alpha) has H^k norm sqrt(pi 3^{2k}).
    """
    a = shape.coeffs
    l = np.arange(a.size)
    w = np.where(l == 0, 2.0 * np.pi, np.pi)
    return float(np.sqrt(np.sum(w * (1.0 + l) ** (2 * k) * a * a)))


def cosine_coeffs(values: np.ndarray, m: int) -> np.ndarray:
    """Project uniform-grid samples onto cosine modes 0..m.

    Returns a_l with f ~ sum a_l cos(l alpha); the sine content is
    discarded (callers assert evenness separately when it matters).
    """
    values = np.asarray(values, dtype=float)
    n = values.size
    if m >= n // 2:
        raise ValueError(f"m = {m} unresolved by {n} samples")
    spec = np.fft.rfft(values)
    a = 2.0 * spec.real / n
    a[0] *= 0.5
    return a[: m + 1]


def resample_trig(values: np.ndarray, n_target: int) -> np.ndarray:
    """Trigonometric interpolation of uniform-grid samples onto n_target angles.

    Exact for functions band-limited below the source Nyquist mode; used to
    carry boundary traces between operator grids of different resolution.
    """
    values = np.asarray(values, dtype=float)
    n = values.size
    if n_target == n:
        return values.copy()
    spec = np.fft.rfft(values)
    a = 2.0 * spec.real / n
    b = -2.0 * spec.imag / n
    a[0] *= 0.5
    if n % 2 == 0:
        a[-1] *= 0.5   # Nyquist cosine appears once in the sum
        b[-1] = 0.0    # sin(n alpha/2) vanishes on the source grid
    alpha = 2.0 * np.pi * np.arange(n_target) / n_target
    l = np.arange(a.size)
    arg = np.multiply.outer(alpha, l)
    return np.cos(arg) @ a + np.sin(arg) @ b