"""Operators of the cone model: conormal multipliers, the transform into the
quantization space, the Toeplitz projection, and the zero-order quantization.

Representation conventions:

  * L^2(M) lives on the arc-length grid (plain grid values, Euclidean inner
    product; the uniform weight h is absorbed into the basis).
  * L^2(2M) and the cosphere double live in Fourier-mode coordinates; grid
    multiplications are conjugated in through the unitary DFT.
  * The cylinder lives on its t-grid.  A conormal multiplier is realized as
    the compression to the window of the exact multiplier on a twice-padded
    periodization, i.e. a Toeplitz kernel indexed by the true t-distance, so
    window wrap-around never couples the two ends of the grid.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .circle import (
    CircleSymbol,
    CircleTruncation,
    TrigPolynomial,
    circle_pdo_quantize,
    guillemin_transform_circle,
)
from .errors import GridMismatch, NonInvertibleB, SpaceMismatch
from .geometry import ConeGeometry, CutoffSystem
from .linalg import (
    LinearOperator,
    Projection,
    fredholm_defect,
    hermitian_eig,
    kernel_projection,
    space,
)
from .symbols import SHEETS, ConeSymbol, ConormalFamily

PAD_FACTOR = 2  # periodization length of the cylinder multiplier, in windows


# ---------------------------------------------------------------------------
# cylinder: conormal multiplier
# ---------------------------------------------------------------------------


def _smoothstep4(x) -> np.ndarray:
    """C^4 polynomial step: 0 below 0, 1 above 1."""
    x = np.clip(np.asarray(x, dtype=float), 0.0, 1.0)
    return x**5 * (126.0 + x * (-420.0 + x * (540.0 + x * (-315.0 + 70.0 * x))))


def _multiplier_kernel(fn, n_t: int, h: float) -> np.ndarray:
    """First column of the padded circulant realizing the multiplier ``fn``.

    The symbol is sampled exactly up to 0.7 of the Nyquist frequency and then
    blended smoothly into its limit, which the two ends of the frequency
    window share.  Raw sampling would leave an O(1/p_max) mismatch across the
    frequency wrap and hence slowly decaying oscillatory kernel tails; the
    blend keeps the kernel decay faster than any relevant polynomial.
    """
    n_big = PAD_FACTOR * n_t
    p = 2.0 * np.pi * np.fft.fftfreq(n_big, d=h)
    p_max = np.max(np.abs(p))
    vals = fn(p)
    limit = fn.limit
    blend = _smoothstep4((np.abs(p) - 0.7 * p_max) / (0.25 * p_max))
    return np.fft.ifft(limit + (vals - limit) * (1.0 - blend))


def _toeplitz_from_kernel(col: np.ndarray, n_t: int) -> np.ndarray:
    idx = np.subtract.outer(np.arange(n_t), np.arange(n_t)) % col.size
    return col[idx]


def conormal_operator(c: ConormalFamily, geo: ConeGeometry) -> LinearOperator:
    """Translation-invariant action of the conormal family on the cylinder."""
    n = geo.n_t
    m = np.zeros((2 * n, 2 * n), dtype=np.complex128)
    for pos, sheet in enumerate((1, 0)):  # label order of the cylinder space
        col = _multiplier_kernel(c.function(sheet), n, geo.h)
        m[pos * n : (pos + 1) * n, pos * n : (pos + 1) * n] = _toeplitz_from_kernel(col, n)
    return LinearOperator(geo.cylinder_space, geo.cylinder_space, m)


def multiplier_leakage(c: ConormalFamily, geo: ConeGeometry) -> float:
    """Largest kernel magnitude beyond half the window distance.

    Bounds the error of the windowed realization against the full line;
    logged with every experiment run.
    """
    worst = 0.0
    for sheet in SHEETS:
        col = _multiplier_kernel(c.function(sheet), geo.n_t, geo.h)
        n_big = col.size
        dist = np.minimum(np.arange(n_big), n_big - np.arange(n_big))
        far = dist >= geo.n_t // 2
        if np.any(far):
            worst = max(worst, float(np.abs(col[far]).max()))
    return worst


# ---------------------------------------------------------------------------
# transport of the interior symbol to the double
# ---------------------------------------------------------------------------


def interior_on_double(a: ConeSymbol, geo: ConeGeometry) -> dict:
    """Sample the interior symbol on the circle grid, per cosphere sheet.

    Copy one of the double carries the symbol as it stands; the glued copy is
    traversed backwards, so the co-direction flips there.  On sheet 0 of the
    cone base the cylinder frequency runs against the arc length, which flips
    the co-direction once more.
    """
    sigma = geo.double_sigma_grid()
    copy2 = geo.double_copy2_mask()
    s_eff = np.where(copy2, np.sign(sigma) * (2.0 * geo.s_cut - np.abs(sigma)), sigma)
    t_eff = geo.t_profile(s_eff)
    sheet = np.where(s_eff >= 0, 1, 0)

    out = {}
    for xi in (+1, -1):
        vals = np.zeros(sigma.size, dtype=np.complex128)
        eff_sign = np.where(copy2, -xi, xi) * np.where(sheet == 1, 1, -1)
        for w in (0, 1):
            for s in (1, -1):
                mask = (sheet == w) & (eff_sign == s)
                if np.any(mask):
                    vals[mask] = a.interior[(w, s)](t_eff[mask])
        out[xi] = vals
    return out


def transported_circle_symbol(a: ConeSymbol, geo: ConeGeometry) -> CircleSymbol:
    """Trigonometric interpolant of the transported interior symbol."""
    samples = interior_on_double(a, geo)
    return CircleSymbol(
        TrigPolynomial.interpolate(samples[+1]), TrigPolynomial.interpolate(samples[-1])
    )


# ---------------------------------------------------------------------------
# building blocks shared by the transform and the quantization
# ---------------------------------------------------------------------------


@dataclass
class _Blocks:
    geo: ConeGeometry
    cs: CutoffSystem
    tr: CircleTruncation
    dft: np.ndarray  # modes x grid, unitary
    inject: np.ndarray  # circle-grid x manifold-grid 0/1 injection
    gamma_dbl: np.ndarray  # cosphere x manifold
    gamma_cyl: np.ndarray  # cylinder x manifold


def _geometry_key(geo: ConeGeometry):
    return (geo.N, geo.t_cut, geo.core_depth, geo.t_minus, geo.t_plus)


def _build_blocks(geo: ConeGeometry, cs: CutoffSystem) -> _Blocks:
    if _geometry_key(cs.geometry) != _geometry_key(geo):
        raise GridMismatch("cutoff system belongs to a different geometry")
    tr = CircleTruncation(geo.N)
    dft = tr.dft_matrix()
    n_dbl = geo.n_double
    inject = np.zeros((n_dbl, geo.manifold_space.dim))
    inject[geo.manifold_to_double_indices(), np.arange(geo.manifold_space.dim)] = 1.0

    # psi T E chi2, assembled in mode coordinates of the double
    T = guillemin_transform_circle(tr).entries  # 2 n_dbl x n_dbl, mode basis
    psi_mode = (dft * cs.psi_on_double()) @ dft.conj().T
    embed_chi2 = dft @ (inject * cs.chi2_s)  # modes x manifold grid
    gamma_dbl = np.vstack(
        [psi_mode @ T[:n_dbl, :] @ embed_chi2, psi_mode @ T[n_dbl:, :] @ embed_chi2]
    )

    # chi1 followed by the exact grid match onto the cylinder
    n_t = geo.n_t
    K = geo.K
    gamma_cyl = np.zeros((2 * n_t, geo.manifold_space.dim))
    for row, j in enumerate(geo.t_indices):
        w = cs.chi1_t[row]
        if w == 0.0:
            continue
        gamma_cyl[row, j + K] = w  # sheet 1, s = +j h
        gamma_cyl[n_t + row, -j + K] = w  # sheet 0, s = -j h
    return _Blocks(geo, cs, tr, dft, inject, gamma_dbl, gamma_cyl)


_blocks_cache: dict = {}


def _blocks(geo: ConeGeometry, cs: CutoffSystem | None = None) -> _Blocks:
    key = _geometry_key(geo)
    cached = _blocks_cache.get(key)
    if cached is not None and (cs is None or cached.cs is cs):
        return cached
    if len(_blocks_cache) > 2:  # bound the memory held by big geometries
        _blocks_cache.clear()
    built = _build_blocks(geo, cs if cs is not None else CutoffSystem(geo))
    _blocks_cache[key] = built
    return built


# ---------------------------------------------------------------------------
# the transform into the quantization space
# ---------------------------------------------------------------------------


def pseudo_guillemin(geo: ConeGeometry, cs: CutoffSystem | None = None) -> LinearOperator:
    """phi |-> psi T(chi2 phi)  (+)  chi1 phi, into cosphere (+) cylinder."""
    b = _blocks(geo, cs)
    m = np.vstack([b.gamma_dbl, b.gamma_cyl])
    return LinearOperator(geo.manifold_space, geo.hilbert_space, m)


@dataclass
class ToeplitzRange:
    """Range data of the transform: projection, cheap surrogate, basis."""

    projection: Projection
    surrogate: LinearOperator  # G G*, not exactly idempotent
    basis: LinearOperator  # ambient x rank, orthonormal columns spanning im(G)
    kernel_projection: Projection
    rank: int
    surrogate_gap: float  # |P - G G*| (Frobenius)


def toeplitz_projection(G: LinearOperator) -> ToeplitzRange:
    """Projection onto im(G) via B = G*G + Q, plus the G G* surrogate."""
    decision = fredholm_defect(G)  # raises AmbiguousRank when borderline
    Q = kernel_projection(G)
    B = (G.H @ G).entries + Q.op.entries
    w = np.linalg.eigvalsh(B)
    if w.min() <= 1e-12 * max(w.max(), 1.0):
        raise NonInvertibleB(f"G*G + Q has near-zero eigenvalue {w.min():.3e}")
    P_m = G.entries @ np.linalg.solve(B, G.entries.conj().T)
    P_m = 0.5 * (P_m + P_m.conj().T)
    P = Projection(LinearOperator(G.codomain, G.codomain, P_m), tol=1e-9)
    surrogate = G @ G.H
    U = np.linalg.svd(G.entries, full_matrices=False)[0][:, : decision.rank]
    tag = space(f"im({G.codomain.name})[r={decision.rank}]", range(decision.rank))
    basis = LinearOperator(tag, G.codomain, U)
    gap = float(np.linalg.norm(P_m - surrogate.entries))
    return ToeplitzRange(P, surrogate, basis, Q, decision.rank, gap)


# ---------------------------------------------------------------------------
# quantizations
# ---------------------------------------------------------------------------


def cone_action(a: ConeSymbol, geo: ConeGeometry) -> LinearOperator:
    """Module action of a symbol on the quantization space.

    Both blocks are mode compressions of the exact continuum action: the
    cosphere block multiplies by the Toeplitz matrix of the transported
    interior symbol, the cylinder block applies the windowed conormal
    multiplier.  Compression (rather than an exactly multiplicative aliased
    product) is essential: the index pairing reads the truncation-edge defect
    of a * a^{-1}, which an exactly multiplicative action would erase.
    """
    b = _blocks(geo)
    samples = interior_on_double(a, geo)
    n_dbl = geo.n_double
    dim = geo.hilbert_space.dim
    m = np.zeros((dim, dim), dtype=np.complex128)
    from .circle import multiplication_operator

    for pos, xi in enumerate((+1, -1)):
        poly = TrigPolynomial.interpolate(samples[xi])
        block = multiplication_operator(poly, b.tr).entries
        m[pos * n_dbl : (pos + 1) * n_dbl, pos * n_dbl : (pos + 1) * n_dbl] = block
    m[2 * n_dbl :, 2 * n_dbl :] = conormal_operator(a.conormal, geo).entries
    return LinearOperator(geo.hilbert_space, geo.hilbert_space, m)


def cone_quantize(
    a: ConeSymbol, geo: ConeGeometry, cs: CutoffSystem | None = None
) -> LinearOperator:
    """Zero-order quantization chi2^2 Ahat + chi1 Aconormal chi1 on L^2(M).

    The interior term is the circle quantization of the transported symbol,
    carried back through the psi-tapered embedding of the manifold into the
    double; the taper keeps the cut locus of the double invisible.
    """
    a.validate(t_min=geo.t_min)
    b = _blocks(geo, cs)
    cs = b.cs
    circ = transported_circle_symbol(a, geo)
    ahat = circle_pdo_quantize(circ, b.tr).entries  # mode basis of L^2(2M)
    psi_mode = (b.dft * cs.psi_on_double()) @ b.dft.conj().T
    embed = b.dft @ b.inject  # manifold grid -> modes
    sandwich = embed.conj().T @ psi_mode @ ahat @ psi_mode @ embed
    interior_term = (cs.chi2_s**2)[:, None] * sandwich

    cyl = conormal_operator(a.conormal, geo).entries
    cylinder_term = b.gamma_cyl.T @ cyl @ b.gamma_cyl

    return LinearOperator(geo.manifold_space, geo.manifold_space, interior_term + cylinder_term)


def toeplitz_quantize(P: Projection, action, a) -> LinearOperator:
    """Compress the ambient action of ``a`` to the range of ``P``.

    ``action`` maps a symbol to an operator on P's space; the result is
    represented in the orthonormal eigenbasis of im(P).
    """
    op = action(a)
    if op.domain != P.space or op.codomain != P.space:
        raise SpaceMismatch("action space does not match the projection")
    w, Q = hermitian_eig(P.op)
    V = Q.entries[:, w > 0.5]
    comp = V.conj().T @ op.entries @ V
    tag = space(f"im({P.space.name})[r={V.shape[1]}]", range(V.shape[1]))
    return LinearOperator(tag, tag, comp)


# ---------------------------------------------------------------------------
# convenience bundle
# ---------------------------------------------------------------------------


class ConeModel:
    """One geometry with its cutoffs, transform, and Toeplitz projection."""

    def __init__(self, geo: ConeGeometry):
        self.geometry = geo
        self.cutoffs = CutoffSystem(geo)
        self.transform = pseudo_guillemin(geo, self.cutoffs)
        self._range = None

    @property
    def range_data(self) -> ToeplitzRange:
        if self._range is None:
            self._range = toeplitz_projection(self.transform)
        return self._range

    @property
    def projection(self) -> Projection:
        return self.range_data.projection

    def action(self, a: ConeSymbol) -> LinearOperator:
        a.validate(t_min=self.geometry.t_min)
        return cone_action(a, self.geometry)

    def quantize(self, a: ConeSymbol) -> LinearOperator:
        return cone_quantize(a, self.geometry, self.cutoffs)

    def transform_conjugate(self, a: ConeSymbol) -> LinearOperator:
        """G* action(a) G: the transform-side realization of the quantization."""
        return self.transform.H @ cone_action(a, self.geometry) @ self.transform
