"""Truncated Fourier model of the circle and its cosphere double cover.

Modes -N..N represent L^2(S^1); the cosphere space is two copies of it
(one per cotangent direction).  The Hardy projection keeps modes n >= 0,
the minus projection the rest; mode 0 is assigned to the plus sheet.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegreeOverflow
from .linalg import LinearOperator, Projection, SpaceTag, space

_ELLIPTIC_RTOL = 1e-12


@dataclass(frozen=True)
class TrigPolynomial:
    """Finitely supported Fourier series sum_m c_m e^{im theta}."""

    coeffs: tuple  # sorted tuple of (mode, coefficient)

    def __init__(self, coeffs):
        if isinstance(coeffs, TrigPolynomial):
            pairs = coeffs.coeffs
        else:
            items = coeffs.items() if hasattr(coeffs, "items") else coeffs
            acc = {}
            for m, c in items:
                c = complex(c)
                if c != 0:
                    acc[int(m)] = acc.get(int(m), 0) + c
            pairs = tuple(sorted((m, c) for m, c in acc.items() if c != 0))
        object.__setattr__(self, "coeffs", pairs)

    @classmethod
    def constant(cls, c) -> "TrigPolynomial":
        return cls({0: complex(c)})

    @classmethod
    def mode(cls, m: int, c=1.0) -> "TrigPolynomial":
        """c * e^{im theta}"""
        return cls({m: complex(c)})

    @classmethod
    def interpolate(cls, samples) -> "TrigPolynomial":
        """Degree <= (n-1)/2 interpolant of samples at theta_j = 2 pi j / n, n odd.

        Coefficients below 1e-14 of the largest are dropped as FFT roundoff.
        """
        v = np.asarray(samples, dtype=np.complex128)
        n = v.size
        if n % 2 == 0:
            raise ValueError("need an odd number of samples")
        c = np.fft.fft(v) / n
        half = (n - 1) // 2
        floor = 1e-14 * np.max(np.abs(c)) if np.max(np.abs(c)) > 0 else 0.0
        coeffs = {}
        for k in range(n):
            m = k if k <= half else k - n
            if np.abs(c[k]) > floor:
                coeffs[m] = c[k]
        return cls(coeffs)

    @property
    def degree(self) -> int:
        return max((abs(m) for m, _ in self.coeffs), default=0)

    def coeff(self, m: int) -> complex:
        for mm, c in self.coeffs:
            if mm == m:
                return c
        return 0j

    def evaluate(self, theta) -> np.ndarray:
        th = np.asarray(theta, dtype=float)
        out = np.zeros(th.shape, dtype=np.complex128)
        for m, c in self.coeffs:
            out += c * np.exp(1j * m * th)
        return out

    def conjugate(self) -> "TrigPolynomial":
        return TrigPolynomial({-m: np.conj(c) for m, c in self.coeffs})

    def __add__(self, other) -> "TrigPolynomial":
        other = _as_trig(other)
        return TrigPolynomial(list(self.coeffs) + list(other.coeffs))

    def __sub__(self, other) -> "TrigPolynomial":
        return self + (-1) * _as_trig(other)

    def __mul__(self, other) -> "TrigPolynomial":
        if np.isscalar(other):
            return TrigPolynomial({m: c * complex(other) for m, c in self.coeffs})
        acc = {}
        for m1, c1 in self.coeffs:
            for m2, c2 in other.coeffs:
                acc[m1 + m2] = acc.get(m1 + m2, 0) + c1 * c2
        return TrigPolynomial(acc)

    __rmul__ = __mul__


def _as_trig(x) -> TrigPolynomial:
    if isinstance(x, TrigPolynomial):
        return x
    return TrigPolynomial.constant(x)


@dataclass(frozen=True)
class CircleSymbol:
    """Zero-order symbol on the circle: one function per cotangent sheet."""

    plus: TrigPolynomial
    minus: TrigPolynomial

    @classmethod
    def unit(cls) -> "CircleSymbol":
        one = TrigPolynomial.constant(1.0)
        return cls(one, one)

    @classmethod
    def multiplication(cls, b: TrigPolynomial) -> "CircleSymbol":
        return cls(b, b)

    @property
    def degree(self) -> int:
        return max(self.plus.degree, self.minus.degree)

    def is_elliptic(self, grid_factor: int = 8) -> bool:
        n = grid_factor * (self.degree + 1)
        theta = np.linspace(0.0, 2 * np.pi, n, endpoint=False)
        for sheet in (self.plus, self.minus):
            vals = np.abs(sheet.evaluate(theta))
            if vals.min() <= _ELLIPTIC_RTOL * max(1.0, vals.max()):
                return False
        return True

    def __mul__(self, other: "CircleSymbol") -> "CircleSymbol":
        return CircleSymbol(self.plus * other.plus, self.minus * other.minus)

    def conjugate(self) -> "CircleSymbol":
        return CircleSymbol(self.plus.conjugate(), self.minus.conjugate())


class CircleTruncation:
    """Everything tied to one cutoff N: spaces, stored grids and mode lists."""

    def __init__(self, N: int):
        if N < 1:
            raise ValueError("N must be positive")
        self.N = int(N)
        self.modes = np.arange(-self.N, self.N + 1)
        self.space: SpaceTag = space(f"L2(S1)[N={N}]", [int(m) for m in self.modes])
        labels = [("+", int(m)) for m in self.modes] + [("-", int(m)) for m in self.modes]
        self.double_space: SpaceTag = space(f"L2(S*S1)[N={N}]", labels)

    @property
    def dim(self) -> int:
        return 2 * self.N + 1

    def theta_grid(self) -> np.ndarray:
        return 2 * np.pi * np.arange(self.dim) / self.dim

    def dft_matrix(self) -> np.ndarray:
        """Unitary map from grid samples at theta_j to mode coefficients -N..N."""
        j = np.arange(self.dim)
        return np.exp(-1j * np.outer(self.modes, self.theta_grid())) / np.sqrt(self.dim)

    def __repr__(self):
        return f"CircleTruncation(N={self.N})"


def multiplication_operator(b: TrigPolynomial, tr: CircleTruncation) -> LinearOperator:
    """Toeplitz matrix of pointwise multiplication by b on the kept modes."""
    b = _as_trig(b)
    if b.degree > 2 * tr.N:
        raise DegreeOverflow(f"degree {b.degree} exceeds 2N = {2 * tr.N}")
    # offset lookup: entry (n, n') = c_{n - n'}
    width = 2 * tr.N
    table = np.zeros(2 * width + 1, dtype=np.complex128)
    for m, c in b.coeffs:
        table[m + width] = c
    offsets = np.subtract.outer(tr.modes, tr.modes) + width
    return LinearOperator(tr.space, tr.space, table[offsets])


def hardy_projections(tr: CircleTruncation):
    """(P_plus, P_minus): diagonal indicators of modes n >= 0 and n < 0."""
    d = (tr.modes >= 0).astype(np.complex128)
    p_plus = LinearOperator(tr.space, tr.space, np.diag(d))
    p_minus = LinearOperator(tr.space, tr.space, np.diag(1.0 - d))
    return Projection(p_plus, tol=0.0), Projection(p_minus, tol=0.0)


def guillemin_transform_circle(tr: CircleTruncation) -> LinearOperator:
    """u |-> (P_+ u on the + sheet, P_- u on the - sheet); exact isometry."""
    p_plus, p_minus = hardy_projections(tr)
    m = np.vstack([p_plus.op.entries, p_minus.op.entries])
    return LinearOperator(tr.space, tr.double_space, m)


def szego_projection(tr: CircleTruncation) -> Projection:
    """T T*: the block-diagonal projection onto the range of the transform."""
    T = guillemin_transform_circle(tr)
    return Projection(T @ T.H, tol=0.0)


def double_multiplication(b: TrigPolynomial, tr: CircleTruncation) -> LinearOperator:
    """Multiplication by a scalar function on both sheets of the double."""
    M = multiplication_operator(b, tr).entries
    z = np.zeros_like(M)
    m = np.block([[M, z], [z, M]])
    return LinearOperator(tr.double_space, tr.double_space, m)


def circle_pdo_quantize(b: CircleSymbol, tr: CircleTruncation) -> LinearOperator:
    """Zero-order quantization M_{b+} P_+ + M_{b-} P_-."""
    p_plus, p_minus = hardy_projections(tr)
    op = (
        multiplication_operator(b.plus, tr) @ p_plus.op
        + multiplication_operator(b.minus, tr) @ p_minus.op
    )
    return op
