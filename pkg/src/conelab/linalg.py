"""Dense complex linear-operator engine.

Operators are plain dense complex matrices tagged with the spaces they act
between.  All spectra are computed by full dense decompositions so that
results are deterministic within a build; no iterative solvers are used.
Spaces of dimension zero are legal everywhere and produce empty results.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    AmbiguousRank,
    NoConvergence,
    NotHermitian,
    SpaceMismatch,
    SpectralGapViolation,
)

# Relative tolerance used by default for rank decisions, and the spectral-gap
# factor a rank decision must exhibit before "zero" singular values are trusted.
RANK_RTOL = 1e-8
RANK_GAP = 10.0
HERMITICITY_RTOL = 1e-10


@dataclass(frozen=True)
class SpaceTag:
    """A named, finite, ordered basis: the stand-in for one Hilbert space."""

    name: str
    dim: int
    basis_labels: tuple

    def __post_init__(self):
        labels = tuple(self.basis_labels)
        object.__setattr__(self, "basis_labels", labels)
        if self.dim != len(labels):
            raise ValueError(f"dim {self.dim} != number of labels {len(labels)}")
        if len(set(labels)) != len(labels):
            raise ValueError("basis labels must be distinct")
        if self.dim < 0:
            raise ValueError("dim must be nonnegative")


def space(name: str, labels) -> SpaceTag:
    labels = tuple(labels)
    return SpaceTag(name, len(labels), labels)


def direct_sum_space(name: str, *tags: SpaceTag) -> SpaceTag:
    labels = []
    for i, tag in enumerate(tags):
        labels.extend((i, lab) for lab in tag.basis_labels)
    return space(name, labels)


@dataclass(frozen=True)
class LinearOperator:
    """Dense matrix from ``domain`` to ``codomain`` (codomain.dim x domain.dim)."""

    domain: SpaceTag
    codomain: SpaceTag
    entries: np.ndarray

    def __post_init__(self):
        m = np.array(self.entries, dtype=np.complex128, copy=True)
        if m.shape != (self.codomain.dim, self.domain.dim):
            raise SpaceMismatch(
                f"entries shape {m.shape} does not match spaces "
                f"({self.codomain.dim}, {self.domain.dim})"
            )
        m.setflags(write=False)
        object.__setattr__(self, "entries", m)

    # ---- algebra -----------------------------------------------------------

    def adjoint(self) -> "LinearOperator":
        return LinearOperator(self.codomain, self.domain, self.entries.conj().T)

    @property
    def H(self) -> "LinearOperator":
        return self.adjoint()

    def __matmul__(self, other: "LinearOperator") -> "LinearOperator":
        if other.codomain != self.domain:
            raise SpaceMismatch(
                f"cannot compose: {self.domain.name} != {other.codomain.name}"
            )
        return LinearOperator(other.domain, self.codomain, self.entries @ other.entries)

    def __add__(self, other: "LinearOperator") -> "LinearOperator":
        self._same_spaces(other)
        return LinearOperator(self.domain, self.codomain, self.entries + other.entries)

    def __sub__(self, other: "LinearOperator") -> "LinearOperator":
        self._same_spaces(other)
        return LinearOperator(self.domain, self.codomain, self.entries - other.entries)

    def __mul__(self, c) -> "LinearOperator":
        return LinearOperator(self.domain, self.codomain, self.entries * complex(c))

    __rmul__ = __mul__

    def __neg__(self) -> "LinearOperator":
        return self * (-1.0)

    def apply(self, vec: np.ndarray) -> np.ndarray:
        return self.entries @ np.asarray(vec, dtype=np.complex128)

    def _same_spaces(self, other: "LinearOperator"):
        if self.domain != other.domain or self.codomain != other.codomain:
            raise SpaceMismatch("operators act between different spaces")

    # ---- norms and traces ----------------------------------------------------

    def norm_fro(self) -> float:
        return float(np.linalg.norm(self.entries))

    def norm2(self) -> float:
        if min(self.entries.shape) == 0:
            return 0.0
        return float(np.linalg.norm(self.entries, 2))

    def trace(self) -> complex:
        if self.domain != self.codomain:
            raise SpaceMismatch("trace requires a square operator")
        # fixed index-ascending summation keeps reports scheduling-independent
        return complex(np.sum(np.diagonal(self.entries)))

    def is_square(self) -> bool:
        return self.domain == self.codomain


def identity(tag: SpaceTag) -> LinearOperator:
    return LinearOperator(tag, tag, np.eye(tag.dim, dtype=np.complex128))


def zero_operator(domain: SpaceTag, codomain: SpaceTag) -> LinearOperator:
    return LinearOperator(domain, codomain, np.zeros((codomain.dim, domain.dim)))


def from_matrix(matrix, name: str = "anon") -> LinearOperator:
    """Wrap a bare matrix; spaces are generated from its shape."""
    m = np.atleast_2d(np.asarray(matrix, dtype=np.complex128))
    dom = space(f"{name}:dom", range(m.shape[1]))
    cod = dom if m.shape[0] == m.shape[1] else space(f"{name}:cod", range(m.shape[0]))
    return LinearOperator(dom, cod, m)


@dataclass(frozen=True)
class Projection:
    """Hermitian idempotent with an explicit defect tolerance."""

    op: LinearOperator
    tol: float = 1e-9

    def __post_init__(self):
        if not self.op.is_square():
            raise SpaceMismatch("projection must be square")
        if self.tol < 0:
            raise ValueError("tol must be nonnegative")
        m = self.op.entries
        herm = float(np.linalg.norm(m - m.conj().T))
        idem = float(np.linalg.norm(m @ m - m))
        # Frobenius dominates the operator norm, so these checks are conservative.
        if herm > self.tol or idem > self.tol:
            raise ValueError(
                f"not a projection at tol {self.tol:g}: "
                f"|P-P*|={herm:.3e}, |P^2-P|={idem:.3e}"
            )

    @property
    def space(self) -> SpaceTag:
        return self.op.domain

    def rank(self) -> int:
        return int(round(self.op.trace().real))

    def complement(self) -> "Projection":
        return Projection(identity(self.space) - self.op, self.tol)

    def verify_spectrum(self) -> float:
        """Max distance of the eigenvalues from {0, 1}."""
        if self.space.dim == 0:
            return 0.0
        w = np.linalg.eigvalsh(self.op.entries)
        return float(np.max(np.minimum(np.abs(w), np.abs(w - 1.0))))


# ---------------------------------------------------------------------------
# spectral machinery
# ---------------------------------------------------------------------------


def _require_hermitian(T: LinearOperator, rtol: float = HERMITICITY_RTOL):
    if not T.is_square():
        raise NotHermitian("operator is not square")
    m = T.entries
    scale = float(np.linalg.norm(m))
    defect = float(np.linalg.norm(m - m.conj().T))
    if defect > rtol * max(scale, 1e-300) and defect > 0.0:
        raise NotHermitian(f"|T-T*| = {defect:.3e} exceeds {rtol:g}*|T| = {rtol * scale:.3e}")


def _canonical_phase(Q: np.ndarray) -> np.ndarray:
    """Fix each eigenvector's phase so the largest-modulus entry is positive real."""
    if Q.size == 0:
        return Q
    idx = np.argmax(np.abs(Q), axis=0)
    pivots = Q[idx, np.arange(Q.shape[1])]
    phases = np.where(np.abs(pivots) > 0, pivots / np.abs(np.where(pivots == 0, 1, pivots)), 1.0)
    return Q / phases


def hermitian_eig(T: LinearOperator):
    """Full eigendecomposition of a Hermitian operator.

    Returns ``(eigenvalues, Q)`` with eigenvalues ascending and ``Q`` unitary,
    ``T = Q diag(w) Q*``.  Exact eigenvalue ties are broken by lexicographic
    ordering of the (phase-fixed) eigenvector entries.
    """
    _require_hermitian(T)
    n = T.domain.dim
    if n == 0:
        return np.zeros(0), LinearOperator(T.domain, T.domain, np.zeros((0, 0)))
    herm = 0.5 * (T.entries + T.entries.conj().T)
    try:
        w, Q = np.linalg.eigh(herm)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK stall
        raise NoConvergence(f"eigensolver failed: {exc}") from exc
    Q = _canonical_phase(Q)
    # lexicographic tie-break within groups of exactly equal eigenvalues,
    # descending by coordinate so standard basis vectors keep index order
    start = 0
    for stop in range(1, n + 1):
        if stop == n or w[stop] != w[start]:
            if stop - start > 1:
                block = Q[:, start:stop]
                keys = np.vstack([-block.real, -block.imag])
                order = np.lexsort(keys[::-1])
                Q[:, start:stop] = block[:, order]
            start = stop
    return w, LinearOperator(T.domain, T.domain, Q)


def spectral_function(T: LinearOperator, f) -> LinearOperator:
    """Apply a scalar real function to a Hermitian operator: Q f(w) Q*."""
    w, Q = hermitian_eig(T)
    fw = np.array([float(f(float(x))) for x in w])
    m = (Q.entries * fw) @ Q.entries.conj().T
    return LinearOperator(T.domain, T.domain, m)


def positive_spectral_projection(
    T: LinearOperator, zero_tol: float = 1e-8, strict: bool = True
) -> Projection:
    """Orthogonal projection onto the span of eigenvectors with eigenvalue > zero_tol.

    With ``strict`` (default) the spectrum must stay out of the ambiguity band
    ``(zero_tol/4, 4*zero_tol)`` in absolute value; eigenvalues crowding the cut
    mean the operator is not reliably invertible at this truncation.
    """
    w, Q = hermitian_eig(T)
    if strict and w.size:
        bad = (np.abs(w) > zero_tol / 4.0) & (np.abs(w) < zero_tol * 4.0)
        if np.any(bad):
            raise SpectralGapViolation(
                f"{int(np.sum(bad))} eigenvalue(s) inside ({zero_tol / 4:g}, {zero_tol * 4:g}): "
                f"closest {w[bad][np.argmin(np.abs(w[bad]))]:.3e}"
            )
    keep = w > zero_tol
    V = Q.entries[:, keep]
    return Projection(LinearOperator(T.domain, T.domain, V @ V.conj().T), tol=1e-9)


# ---------------------------------------------------------------------------
# singular-value machinery
# ---------------------------------------------------------------------------


def schatten_norm(T: LinearOperator, p: float) -> float:
    """(sum s_i^p)^(1/p) over singular values; p = inf gives the largest one."""
    if p != np.inf and p < 1:
        raise ValueError("p must be >= 1 or inf")
    if min(T.entries.shape) == 0:
        return 0.0
    s = np.linalg.svd(T.entries, compute_uv=False)
    if p == np.inf:
        return float(s[0])
    if p == 2.0:
        return float(np.sqrt(np.sum(s * s)))
    return float(np.sum(s**p) ** (1.0 / p))


@dataclass(frozen=True)
class RankDecision:
    rank: int
    kernel_dim: int
    cokernel_dim: int
    gap: float
    tol: float


def _rank_split(s: np.ndarray, tol):
    """Split singular values into kept/dropped, returning (rank, gap, tol)."""
    smax = float(s[0]) if s.size else 0.0
    if tol is None:
        tol = RANK_RTOL * smax
    if smax == 0.0 or smax < 1e-300:
        return 0, np.inf, tol
    kept = s >= tol
    rank = int(np.sum(kept))
    if rank == s.size:
        gap = float(s[-1] / tol) if tol > 0 else np.inf
    elif rank == 0:
        gap = np.inf
    else:
        gap = float(s[rank - 1] / s[rank]) if s[rank] > 0 else np.inf
        if gap < RANK_GAP:
            raise AmbiguousRank(
                f"no x{RANK_GAP:g} spectral gap at rank {rank}: "
                f"s[{rank - 1}]={s[rank - 1]:.3e}, s[{rank}]={s[rank]:.3e}"
            )
    return rank, gap, tol


def fredholm_defect(T: LinearOperator, tol: float | None = None) -> RankDecision:
    """Count numerical kernel/cokernel dimensions from the singular values."""
    if min(T.entries.shape) == 0:
        return RankDecision(0, T.domain.dim, T.codomain.dim, np.inf, 0.0)
    s = np.linalg.svd(T.entries, compute_uv=False)
    rank, gap, tol = _rank_split(s, tol)
    return RankDecision(rank, T.domain.dim - rank, T.codomain.dim - rank, gap, tol)


def kernel_projection(T: LinearOperator, tol: float | None = None) -> Projection:
    """Orthogonal projection onto the numerical null space of T."""
    if T.domain.dim == 0:
        return Projection(identity(T.domain), 0.0)
    if T.codomain.dim == 0:
        return Projection(identity(T.domain), 0.0)
    _, s, Vh = np.linalg.svd(T.entries)
    rank, _, _ = _rank_split(s, tol)
    Vnull = Vh[rank:, :].conj().T  # full_matrices svd: rows past the rank span ker T
    return Projection(LinearOperator(T.domain, T.domain, Vnull @ Vnull.conj().T), tol=1e-9)


def range_projection(T: LinearOperator, tol: float | None = None) -> Projection:
    """Orthogonal projection onto the numerical column space of T."""
    if T.domain.dim == 0 or T.codomain.dim == 0:
        return Projection(zero_operator(T.codomain, T.codomain), 0.0)
    U, s, _ = np.linalg.svd(T.entries)
    rank, _, _ = _rank_split(s, tol)
    Ur = U[:, :rank]
    return Projection(LinearOperator(T.codomain, T.codomain, Ur @ Ur.conj().T), tol=1e-9)
