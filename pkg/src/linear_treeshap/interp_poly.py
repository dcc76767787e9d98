"""Polynomials stored by their values at fixed interpolation points.

Products and quotients by linear factors ``(y + p)`` are pointwise and cost
O(D). The functional

    psi_d(A) = <A, B_d> / (d + 1),   B_d(y) = sum_k y^k / binom(d, k)

is linear in the values, so it is a dot product with a precomputed weight
vector ``N_d``. Writing ``t = y / (1 + y)`` turns it into a plain integral,

    psi_d(p) = int_0^1 (1 - t)^d p(t / (1 - t)) dt,

whose integrand is a polynomial of degree <= d in ``t``. The points are
therefore the interior Chebyshev points of the second kind in ``t`` mapped
back through ``y = t / (1 - t)``, and ``N_d`` is built from the matching
(Fejer type-2) quadrature weights, all positive. This keeps the weights
bounded where a monomial Vandermonde solve on a short interval does not.
"""
from __future__ import annotations

import functools
from dataclasses import dataclass

import numpy as np

MAX_DEGREE = 32


class DegreeError(ValueError):
    pass


class PoleError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class InterpolationBasis:
    max_degree: int
    points: np.ndarray  # Y, shape (D+1,)
    pow1p: np.ndarray  # pow1p[k, j] = (1 + y_j)^k
    N: np.ndarray  # N[d] satisfies <q(Y), N[d]> = <coeffs(q), C_d> for deg q <= d

    @property
    def size(self) -> int:
        return self.max_degree + 1


@dataclass(eq=False)
class ValuePoly:
    values: np.ndarray
    degree: int
    basis: InterpolationBasis

    def copy(self) -> "ValuePoly":
        return ValuePoly(self.values.copy(), self.degree, self.basis)


def fejer2_rule(n_points: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes (ascending) and weights of Fejer's second rule on [0, 1].

    The nodes are the roots of U_n, i.e. the Chebyshev points of the second
    kind with the two endpoints removed.
    """
    n = n_points + 1
    theta = np.arange(1, n) * np.pi / n
    j = np.arange(1, n // 2 + 1)
    odd = 2 * j - 1
    sums = (np.sin(np.outer(theta, odd)) / odd).sum(axis=1)
    w = 4.0 * np.sin(theta) / n * sums
    t = np.sin(theta / 2.0) ** 2
    # enforce the mirror symmetry t <-> 1 - t so the middle node is exactly 1/2
    half = n_points // 2
    if half:
        t[-half:] = 1.0 - t[:half][::-1]
    if n_points % 2:
        t[half] = 0.5
    w = (w + w[::-1]) / 2.0
    return t, w / 2.0


def reciprocal_binomial(d: int) -> np.ndarray:
    """Coefficients of B_d, lowest degree first."""
    from math import comb

    return np.array([1.0 / comb(d, k) for k in range(d + 1)])


@functools.lru_cache(maxsize=None)
def make_basis(max_degree: int) -> InterpolationBasis:
    if max_degree < 0:
        raise DegreeError("max_degree must be non-negative")
    if max_degree > MAX_DEGREE:
        raise DegreeError(
            f"trees with {max_degree} distinct features on a path exceed the supported {MAX_DEGREE}"
        )
    t, w = fejer2_rule(max_degree + 1)
    y = t / (1.0 - t)
    k = np.arange(max_degree + 1)
    pow1p = (1.0 + y)[None, :] ** k[:, None]
    # (1 - t)^d == 1 / (1 + y)^d
    N = (k + 1.0)[:, None] * w[None, :] * (1.0 - t)[None, :] ** k[:, None]
    for arr in (y, pow1p, N):
        arr.setflags(write=False)
    return InterpolationBasis(max_degree, y, pow1p, N)


def poly_one(basis: InterpolationBasis) -> ValuePoly:
    return ValuePoly(np.ones(basis.size), 0, basis)


def from_coefficients(coeffs, basis: InterpolationBasis, degree: int | None = None) -> ValuePoly:
    """Sample the polynomial with the given coefficients (lowest first) at Y."""
    coeffs = np.asarray(coeffs, dtype=float)
    if degree is None:
        degree = len(coeffs) - 1
    if degree > basis.max_degree:
        raise DegreeError(f"degree {degree} exceeds basis size {basis.max_degree}")
    values = np.polynomial.polynomial.polyval(basis.points, coeffs)
    return ValuePoly(values, degree, basis)


def to_coefficients(g: ValuePoly) -> np.ndarray:
    """Recover coefficients by solving the Vandermonde system; small D only."""
    V = np.vander(g.basis.points, increasing=True)
    return np.linalg.solve(V, g.values)[: g.degree + 1]


def mul_linear(g: ValuePoly, p: float) -> ValuePoly:
    if g.degree >= g.basis.max_degree:
        raise DegreeError(f"degree {g.degree} + 1 exceeds basis size {g.basis.max_degree}")
    return ValuePoly(g.values * (g.basis.points + p), g.degree + 1, g.basis)


def div_linear(g: ValuePoly, p: float) -> ValuePoly:
    """Pointwise quotient by ``(y + p)``.

    Exact when ``(y + p)`` divides ``g``; otherwise the samples are those of a
    rational function, which is only meaningful inside sums whose remainders
    cancel.
    """
    if p < 0:
        raise PoleError(f"shift {p} is outside the feasible set {{0}} U [1, inf)")
    denom = g.basis.points + p
    if np.any(denom == 0.0):
        raise PoleError(f"y + {p} vanishes at an interpolation point")
    return ValuePoly(g.values / denom, max(g.degree - 1, 0), g.basis)


def add_scaled(g1: ValuePoly, g2: ValuePoly, basis: InterpolationBasis | None = None) -> ValuePoly:
    """``g1 (+) g2``: lift the lower-degree operand by ``(1+y)^gap`` and add."""
    basis = basis or g1.basis
    if g1.degree >= g2.degree:
        hi, lo = g1, g2
    else:
        hi, lo = g2, g1
    gap = hi.degree - lo.degree
    return ValuePoly(hi.values + lo.values * basis.pow1p[gap], hi.degree, basis)


def psi(g: ValuePoly, d: int | None = None, basis: InterpolationBasis | None = None) -> float:
    basis = basis or g.basis
    if d is None:
        d = g.degree
    if not 0 <= d <= basis.max_degree:
        raise DegreeError(f"psi degree {d} outside [0, {basis.max_degree}]")
    return float(np.dot(g.values, basis.N[d])) / (d + 1)
