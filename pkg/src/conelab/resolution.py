"""Resolutions of a projection, their roll-ups, and equivalence testing.

A bounded resolution of a projection P on H_0 is an exact chain
0 -> im P -> H_0 -> H_1 -> ... -> H_n of spaces and maps that almost commute
with the module action.  Its roll-up D = A + A* + P + (-1)^{n+1} Ptilde is
self-adjoint and invertible, and the positive spectral projection of D
defines a Toeplitz quantization with the same index battery as P.

Unbounded variants carry maps of arbitrary norm standing for closed densely
defined operators; the normalization B = A (1 + A*A)^{-1/2} produces the
bounded resolution with identical kernels, ranges, and dual projection.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .circle import CircleTruncation, TrigPolynomial, hardy_projections, multiplication_operator
from .errors import (
    InfeasibleRanks,
    NotAComplex,
    NotInvertible,
    NotInvertibleRestriction,
    NotPSD,
    SpaceMismatch,
)
from .linalg import (
    LinearOperator,
    Projection,
    SpaceTag,
    direct_sum_space,
    fredholm_defect,
    hermitian_eig,
    identity,
    kernel_projection,
    positive_spectral_projection,
    range_projection,
    space,
    spectral_function,
    zero_operator,
)
from .index import IndexReport, index_via_character

EXACTNESS_TOL = 1e-8


# ---------------------------------------------------------------------------
# data types
# ---------------------------------------------------------------------------


@dataclass
class BoundedResolution:
    """Projection, spaces, maps, and the per-space symbol action."""

    P: Projection
    spaces: list
    maps: list
    action: object  # callable (symbol, space_index) -> LinearOperator
    name: str = ""

    @property
    def length(self) -> int:
        return len(self.maps)

    def validate(self, tol: float = EXACTNESS_TOL):
        if self.P.space != self.spaces[0]:
            raise SpaceMismatch("projection must live on the first space")
        for j, A in enumerate(self.maps):
            if A.domain != self.spaces[j] or A.codomain != self.spaces[j + 1]:
                raise SpaceMismatch(f"map {j} does not match the space chain")
        if self.maps:
            k0 = kernel_projection(self.maps[0])
            defect = (k0.op - self.P.op).norm_fro()
            if defect > tol:
                raise NotAComplex(f"ker A_0 != im P (defect {defect:.3e})")
            for j in range(1, len(self.maps)):
                kj = kernel_projection(self.maps[j])
                rj = range_projection(self.maps[j - 1])
                defect = (kj.op - rj.op).norm_fro()
                if defect > tol:
                    raise NotAComplex(f"ker A_{j} != im A_{j - 1} (defect {defect:.3e})")
            for A in self.maps:
                fredholm_defect(A)  # raises AmbiguousRank if borderline

    def commutator_norms(self, battery) -> dict:
        out = {}
        for sym in battery:
            worst = 0.0
            for j, A in enumerate(self.maps):
                comm = A @ self.action(sym, j) - self.action(sym, j + 1) @ A
                worst = max(worst, comm.norm2())
            out[getattr(sym, "name", str(sym))] = worst
        return out

    def sum_space(self) -> SpaceTag:
        return direct_sum_space(f"sum({self.spaces[0].name},n={self.length})", *self.spaces)

    def sum_action(self, sym) -> LinearOperator:
        """The symbol acting diagonally on the direct sum of all spaces."""
        tag = self.sum_space()
        dims = [s.dim for s in self.spaces]
        m = np.zeros((tag.dim, tag.dim), dtype=np.complex128)
        at = 0
        for j, d in enumerate(dims):
            m[at : at + d, at : at + d] = self.action(sym, j).entries
            at += d
        return LinearOperator(tag, tag, m)


@dataclass
class UnboundedResolution:
    """Chain of possibly large-normed maps; P_0 is derived from ker A_0."""

    spaces: list
    maps: list
    action: object = None
    name: str = ""
    commutator_bounds: dict = field(default_factory=dict)

    @property
    def length(self) -> int:
        return len(self.maps)

    def validate(self, tol: float = 1e-9):
        scale = max((A.norm_fro() for A in self.maps), default=1.0)
        for j in range(len(self.maps) - 1):
            comp = self.maps[j + 1] @ self.maps[j]
            if comp.norm_fro() > tol * max(scale**2, 1.0):
                raise NotAComplex(
                    f"A_{j + 1} A_{j} != 0 (norm {comp.norm_fro():.3e}, scale {scale:.3e})"
                )
        for j in range(1, len(self.maps)):
            kj = kernel_projection(self.maps[j])
            rj = range_projection(self.maps[j - 1])
            defect = (kj.op - rj.op).norm_fro()
            if defect > EXACTNESS_TOL:
                raise NotAComplex(f"middle cohomology at term {j} (defect {defect:.3e})")

    def head_projection(self) -> Projection:
        return kernel_projection(self.maps[0])

    def dual_projection(self) -> Projection:
        return Projection(identity(self.spaces[-1]) - range_projection(self.maps[-1]).op)


@dataclass
class RollUp:
    D: LinearOperator
    P0: Projection
    Pn: Projection
    sign: int
    space: SpaceTag
    min_abs_eig: float


# ---------------------------------------------------------------------------
# bounded constructions
# ---------------------------------------------------------------------------


def dual_projection(res: BoundedResolution) -> Projection:
    """Projection onto the cokernel of the last map (onto im(P)^perp at length 0)."""
    if not res.maps:
        return Projection(identity(res.spaces[0]) - res.P.op)
    last = res.maps[-1]
    return Projection(identity(last.codomain) - range_projection(last).op)


def roll_up(res: BoundedResolution) -> RollUp:
    """D = A + A* + P + (-1)^{n+1} Ptilde on the direct sum of the chain."""
    n = res.length
    tag = res.sum_space()
    dims = [s.dim for s in res.spaces]
    offs = np.concatenate([[0], np.cumsum(dims)])
    m = np.zeros((tag.dim, tag.dim), dtype=np.complex128)
    for j, A in enumerate(res.maps):
        r0, r1 = offs[j + 1], offs[j + 2]
        c0, c1 = offs[j], offs[j + 1]
        m[r0:r1, c0:c1] = A.entries
        m[c0:c1, r0:r1] = A.entries.conj().T
    m[: dims[0], : dims[0]] += res.P.op.entries
    dual = dual_projection(res)
    sign = (-1) ** (n + 1)
    m[offs[-2] :, offs[-2] :] += sign * dual.op.entries
    D = LinearOperator(tag, tag, m)
    w = np.linalg.eigvalsh(D.entries)
    min_abs = float(np.min(np.abs(w))) if w.size else np.inf
    scale = float(np.max(np.abs(w))) if w.size else 1.0
    if min_abs <= 1e-8 * max(scale, 1.0):
        raise NotInvertible(
            f"roll-up has near-zero eigenvalue {min_abs:.3e}; re-certify exactness"
        )
    return RollUp(D, res.P, dual, sign, tag, min_abs)


def reduction_unitary(Aop: LinearOperator) -> LinearOperator:
    """The rotation diagonalizing [[0, A*], [A, 0]] for invertible A."""
    dec = fredholm_defect(Aop)
    if dec.kernel_dim or dec.cokernel_dim:
        raise NotInvertibleRestriction(
            f"restricted map has kernel {dec.kernel_dim}, cokernel {dec.cokernel_dim}"
        )
    AstarA = Aop.H @ Aop
    AAstar = Aop @ Aop.H
    inv_sqrt = lambda lam: 1.0 / np.sqrt(max(lam, 0.0))
    left = spectral_function(AstarA, inv_sqrt)  # (A*A)^{-1/2}
    right = spectral_function(AAstar, inv_sqrt)  # (AA*)^{-1/2}
    dE, dR = Aop.domain.dim, Aop.codomain.dim
    tag = direct_sum_space(f"rot({Aop.domain.name})", Aop.domain, Aop.codomain)
    m = np.zeros((dE + dR, dE + dR), dtype=np.complex128)
    m[:dE, :dE] = np.eye(dE)
    m[:dE, dE:] = -(left.entries @ Aop.entries.conj().T)
    m[dE:, :dE] = right.entries @ Aop.entries
    m[dE:, dE:] = np.eye(dR)
    return LinearOperator(tag, tag, m / np.sqrt(2.0))


def antidiagonal_block(Aop: LinearOperator) -> LinearOperator:
    """V = [[0, A*], [A, 0]] on domain (+) codomain."""
    dE, dR = Aop.domain.dim, Aop.codomain.dim
    tag = direct_sum_space(f"rot({Aop.domain.name})", Aop.domain, Aop.codomain)
    m = np.zeros((dE + dR, dE + dR), dtype=np.complex128)
    m[:dE, dE:] = Aop.entries.conj().T
    m[dE:, :dE] = Aop.entries
    return LinearOperator(tag, tag, m)


# ---------------------------------------------------------------------------
# equivalence testing
# ---------------------------------------------------------------------------


@dataclass
class EquivalenceCell:
    symbol: str
    left: IndexReport
    right: IndexReport

    @property
    def conclusive(self) -> bool:
        return self.left.conclusive and self.right.conclusive

    @property
    def equal(self) -> bool:
        return self.left.rounded == self.right.rounded


def _side_projection(side, zero_tol: float = 1e-6) -> Projection:
    if isinstance(side, Projection):
        return side
    if isinstance(side, RollUp):
        return positive_spectral_projection(side.D, zero_tol=zero_tol)
    raise SpaceMismatch(f"cannot interpret {type(side).__name__} as a quantization side")


def _lift_projection(P: Projection, target: SpaceTag) -> Projection:
    """Tensor P with the identity when the action space is a multiple of P's."""
    mult, rem = divmod(target.dim, P.space.dim)
    if rem or mult < 1:
        raise SpaceMismatch(
            f"action space dim {target.dim} is not a multiple of {P.space.dim}"
        )
    if mult == 1:
        if target != P.space:
            raise SpaceMismatch("action space does not match the projection")
        return P
    big = np.kron(np.eye(mult), P.op.entries)
    return Projection(LinearOperator(target, target, big), tol=max(P.tol * mult, 1e-12))


def equivalence_test(side_a, side_b, battery, N: int = 1) -> list:
    """Compare rounded indices of two Toeplitz quantizations over a battery.

    Each side is ``(P_or_rollup, action)``; matrix symbols are handled by
    tensoring the projection with the identity on the matrix factor.
    Returns one cell per symbol; inconclusive sides are propagated, not hidden.
    """
    cells = []
    sides = [(_side_projection(thing), action) for thing, action in (side_a, side_b)]
    for sym, sym_inv, name in battery:
        reports = []
        for P, action in sides:
            a_op = action(sym)
            a_inv_op = action(sym_inv)
            P_use = _lift_projection(P, a_op.domain)
            reports.append(index_via_character(P_use, a_op, a_inv_op, N=N, symbol=name))
        cells.append(EquivalenceCell(name, reports[0], reports[1]))
    return cells


# ---------------------------------------------------------------------------
# synthetic instances
# ---------------------------------------------------------------------------


def _mode_interval_map(tr: CircleTruncation, src_mask, scale_vals) -> np.ndarray:
    m = np.zeros((tr.dim, tr.dim), dtype=np.complex128)
    idx = np.nonzero(src_mask)[0]
    m[idx, idx] = scale_vals
    return m


def synth_resolution(seed: int, dims=None, length: int = 2, N: int = 16) -> BoundedResolution:
    """Deterministic mode-structured resolution over circle truncations.

    The projection is the indicator of modes >= c0; the maps are diagonal
    partial isometries onto alternating up/down mode sets scaled by positive
    factors of condition number <= 10, so all rank decisions sit far from
    tolerance and the multiplication action has genuine index content.
    """
    rng = np.random.default_rng(seed)
    tr = CircleTruncation(N)
    n_spaces = length + 1
    if dims is not None and len(dims) != n_spaces:
        raise InfeasibleRanks(f"need {n_spaces} dims for length {length}")
    spaces_ = [tr.space] * n_spaces
    c0 = int(rng.integers(-N // 3, N // 3 + 1))
    up = tr.modes >= c0  # im P
    P = Projection(
        LinearOperator(tr.space, tr.space, np.diag(up.astype(np.complex128))), tol=0.0
    )
    maps = []
    kernel_mask = up
    for _ in range(length):
        src = ~kernel_mask
        scales = rng.uniform(0.7, 4.0, size=int(np.sum(src)))
        maps.append(LinearOperator(tr.space, tr.space, _mode_interval_map(tr, src, scales)))
        kernel_mask = src  # im A_j = src modes; next kernel must equal it
    action = lambda sym, j: multiplication_operator(sym, tr)
    res = BoundedResolution(P, spaces_, maps, action, name=f"synth(seed={seed},n={length})")
    res.validate()
    return res


def hardy_resolution(length: int, N: int = 32) -> BoundedResolution:
    """The Hardy-space chain: P = modes >= 0, maps alternating P_-, P_+."""
    tr = CircleTruncation(N)
    p_plus, p_minus = hardy_projections(tr)
    maps = []
    for j in range(length):
        maps.append(p_minus.op if j % 2 == 0 else p_plus.op)
    action = lambda sym, j: multiplication_operator(sym, tr)
    res = BoundedResolution(
        p_plus, [tr.space] * (length + 1), maps, action, name=f"hardy(n={length})"
    )
    res.validate()
    return res


# ---------------------------------------------------------------------------
# unbounded machinery
# ---------------------------------------------------------------------------


def laplacians(res: UnboundedResolution) -> list:
    """Delta_j = A_j* A_j + A_{j-1} A_{j-1}* along the chain."""
    scale = max((A.norm_fro() for A in res.maps), default=1.0)
    for j in range(len(res.maps) - 1):
        if (res.maps[j + 1] @ res.maps[j]).norm_fro() > 1e-9 * max(scale**2, 1.0):
            raise NotAComplex(f"not a complex at step {j}")
    out = []
    for j, sp in enumerate(res.spaces):
        lap = zero_operator(sp, sp)
        if j < len(res.maps):
            lap = lap + res.maps[j].H @ res.maps[j]
        if j > 0:
            lap = lap + res.maps[j - 1] @ res.maps[j - 1].H
        out.append(lap)
    return out


def bounded_normalization(res: UnboundedResolution) -> BoundedResolution:
    """B_j = A_j (1 + Delta_j)^{-1/2}: same kernels, ranges, dual projection."""
    res.validate()
    laps = laplacians(res)
    maps = []
    for j, A in enumerate(res.maps):
        inv_half = spectral_function(laps[j], lambda lam: 1.0 / np.sqrt(1.0 + max(lam, 0.0)))
        B = A @ inv_half
        if B.norm2() > 1.0 + 1e-9:
            raise NotInvertible(f"|B_{j}| = {B.norm2():.6f} exceeds 1")
        ker_same = (kernel_projection(B).op - kernel_projection(A).op).norm_fro()
        rng_same = (range_projection(B).op - range_projection(A).op).norm_fro()
        if max(ker_same, rng_same) > EXACTNESS_TOL:
            raise NotAComplex(
                f"normalization moved kernel/range of map {j}: {ker_same:.2e}, {rng_same:.2e}"
            )
        maps.append(B)
    P0 = res.head_projection()
    out = BoundedResolution(P0, list(res.spaces), maps, res.action, name=f"{res.name}|bounded")
    out.validate()
    return out


def unbounded_roll_up(res: UnboundedResolution) -> RollUp:
    bounded_shell = BoundedResolution(
        res.head_projection(), list(res.spaces), list(res.maps), res.action, name=res.name
    )
    return roll_up(bounded_shell)


def inverse_sqrt_quadrature(delta: LinearOperator, nodes: int = 200) -> LinearOperator:
    """(1 + Delta)^{-1/2} by Gauss-Legendre on lambda = u^2/(1-u)^2.

    Independent of the spectral path: each node costs one linear solve.
    """
    if not delta.is_square():
        raise NotPSD("operator is not square")
    herm = 0.5 * (delta.entries + delta.entries.conj().T)
    if np.linalg.norm(herm - delta.entries) > 1e-8 * max(1.0, np.linalg.norm(delta.entries)):
        raise NotPSD("operator is not Hermitian")
    wmin = float(np.linalg.eigvalsh(herm).min()) if delta.domain.dim else 0.0
    if wmin < -1e-8 * max(1.0, np.linalg.norm(herm)):
        raise NotPSD(f"negative eigenvalue {wmin:.3e}")
    x, w = np.polynomial.legendre.leggauss(int(nodes))
    u = 0.5 * (x + 1.0)  # map to (0, 1)
    wu = 0.5 * w
    n = delta.domain.dim
    acc = np.zeros((n, n), dtype=np.complex128)
    eye = np.eye(n)
    for ui, wi in zip(u, wu):
        lam = (ui / (1.0 - ui)) ** 2
        weight = (2.0 / np.pi) * wi / (1.0 - ui) ** 2
        acc += weight * np.linalg.solve(eye * (1.0 + lam) + herm, eye)
    return LinearOperator(delta.domain, delta.domain, acc)


def unbounded_roll_up_check(res: UnboundedResolution) -> dict:
    """Positive spectral projections of the raw and normalized roll-ups agree.

    Also verifies the closed normalization identity
    B + B* = (A + A*)(1 + (A + A*)^2)^{-1/2} directly.
    """
    raw = unbounded_roll_up(res)
    bounded = bounded_normalization(res)
    norm = roll_up(bounded)
    p_raw = positive_spectral_projection(raw.D, zero_tol=1e-8 * max(raw.min_abs_eig, 1.0))
    p_norm = positive_spectral_projection(norm.D, zero_tol=1e-8)
    proj_gap = (p_raw.op - p_norm.op).norm2()

    # assemble A + A* and B + B* on the sum space, without the projections
    def sum_of_maps(maps, spaces):
        tag = direct_sum_space("chk", *spaces)
        dims = [s.dim for s in spaces]
        offs = np.concatenate([[0], np.cumsum(dims)])
        m = np.zeros((tag.dim, tag.dim), dtype=np.complex128)
        for j, A in enumerate(maps):
            m[offs[j + 1] : offs[j + 2], offs[j] : offs[j + 1]] = A.entries
            m[offs[j] : offs[j + 1], offs[j + 1] : offs[j + 2]] = A.entries.conj().T
        return LinearOperator(tag, tag, m)

    sumA = sum_of_maps(res.maps, res.spaces)
    sumB = sum_of_maps(bounded.maps, bounded.spaces)
    target = spectral_function(sumA @ sumA, lambda lam: 1.0 / np.sqrt(1.0 + max(lam, 0.0)))
    identity_defect = (sumB - sumA @ target).norm2()
    return {
        "projection_gap": float(proj_gap),
        "normalization_identity_defect": float(identity_defect),
        "raw_min_eig": raw.min_abs_eig,
        "normalized_min_eig": norm.min_abs_eig,
    }
