"""Cone model operators: multipliers, the transform, projection, quantization."""

import numpy as np
import pytest

from conelab.cone import (
    ConeModel,
    cone_action,
    cone_quantize,
    conormal_operator,
    interior_on_double,
    multiplier_leakage,
    pseudo_guillemin,
    toeplitz_projection,
    toeplitz_quantize,
    transported_circle_symbol,
)
from conelab.circle import CircleSymbol, CircleTruncation, TrigPolynomial, circle_pdo_quantize, hardy_projections, multiplication_operator
from conelab.errors import AmbiguousRank, NonInvertibleB, PoleOnRealAxis, SpaceMismatch
from conelab.geometry import ConeGeometry, CutoffSystem
from conelab.linalg import LinearOperator, Projection, from_matrix, identity, schatten_norm, space
from conelab.symbols import ConeSymbol, ConormalFamily, RationalFunction


@pytest.fixture(scope="module")
def geo(small_model):
    return small_model.geometry


# ---------------------------------------------------------------------------
# conormal multipliers
# ---------------------------------------------------------------------------


def test_conormal_unit_is_identity(geo):
    op = conormal_operator(ConormalFamily.unit(), geo)
    assert np.allclose(op.entries, np.eye(geo.cylinder_space.dim), atol=1e-12)


def test_conormal_adjoint_is_conjugate_family(geo):
    fam = ConormalFamily(RationalFunction.cayley(1), RationalFunction.cayley(-2))
    lhs = conormal_operator(fam, geo).H
    rhs = conormal_operator(fam.conjugate(), geo)
    assert (lhs - rhs).norm_fro() <= 1e-10


def test_conormal_gaussian_packet_oracle():
    # fine, wide cylinder: h ~ 0.05, window beyond +/-40
    geo = ConeGeometry(N=560, t_minus=40.0, t_plus=41.0)
    fam = ConormalFamily(RationalFunction.constant(1.0), RationalFunction.cayley(1))
    op = conormal_operator(fam, geo)
    w, p0 = 4.0, 5.0
    t = geo.t_grid
    packet = np.exp(-(t**2) / (2 * w * w) + 1j * p0 * t)
    vec = np.zeros(geo.cylinder_space.dim, dtype=complex)
    vec[: geo.n_t] = packet  # sheet 1 block
    got = (op.entries @ vec)[: geo.n_t]

    # independent oracle: the multiplier integral with the exact Gaussian
    # transform, evaluated by quadrature
    p = np.linspace(-60.0, 60.0, 48001)
    packet_hat = w * np.sqrt(2 * np.pi) * np.exp(-(w * w) * (p - p0) ** 2 / 2)
    vals = fam.sheet1(p)
    oracle = np.trapezoid(
        vals[None, :] * packet_hat[None, :] * np.exp(1j * np.outer(t, p)), p, axis=1
    ) / (2 * np.pi)
    err = np.linalg.norm(got - oracle) / np.linalg.norm(packet)
    assert err < 1e-4
    scale = np.vdot(packet, got) / np.vdot(packet, packet)
    assert abs(scale - fam.sheet1(np.array([p0]))[0]) < 0.05


def test_conormal_rejects_real_poles(geo):
    with pytest.raises(PoleOnRealAxis):
        ConormalFamily(
            RationalFunction([0.0, 1.0], [1e-12j, 1.0]), RationalFunction.constant(1.0)
        )


def test_conormal_kernel_decay_disjoint_supports(geo):
    # a conormal_operator(c) b with disjointly supported a, b has entries
    # bounded by C_N (1+|t|+|t'|)^{-N}; the rational family decays
    # exponentially so the polynomial fit holds with margin
    fam = ConormalFamily(RationalFunction.cayley(1), RationalFunction.cayley(1))
    op = conormal_operator(fam, geo).entries[: geo.n_t, : geo.n_t]
    t = geo.t_grid
    a = np.where((t > -16) & (t < -8), 1.0, 0.0)
    b = np.where((t > -2) & (t < 6), 1.0, 0.0)
    sandwich = a[:, None] * op * b[None, :]
    weights = 1.0 + np.abs(t)[:, None] + np.abs(t)[None, :]
    support = (a[:, None] * b[None, :]) > 0
    for power in (2, 4):
        fitted = np.max(np.abs(sandwich[support]) * weights[support] ** power)
        # the fitted constant must stay small: the kernel beats the bound
        assert fitted < 1e-2


def test_multiplier_leakage_logged(geo):
    fam = ConormalFamily(RationalFunction.cayley(2), RationalFunction.cayley(-2))
    leak = multiplier_leakage(fam, geo)
    assert 0.0 <= leak < 1e-8


# ---------------------------------------------------------------------------
# transport to the double
# ---------------------------------------------------------------------------


def test_transport_continuous_on_circle(geo):
    sym = ConeSymbol.interior_winding(2, -1) * ConeSymbol.cayley(1)
    samples = interior_on_double(sym, geo)
    sigma = geo.double_sigma_grid()
    order = np.argsort(sigma)
    for xi in (+1, -1):
        vals = samples[xi][order]
        loop = np.concatenate([vals, vals[:1]])
        assert np.max(np.abs(np.diff(loop))) < 3.0 * geo.h  # Lipschitz-ish


def test_transport_unit_symbol(geo):
    samples = interior_on_double(ConeSymbol.unit(), geo)
    assert np.allclose(samples[+1], 1.0) and np.allclose(samples[-1], 1.0)


def test_transported_windings_split_per_sheet(geo):
    # branch windings (w, v) become total windings (w, -v)-mirrored on the
    # closed double: plus sheet carries w over copy one, minus sheet -w over
    # the glued copy
    sym = ConeSymbol.interior_winding(1, 0)
    samples = interior_on_double(sym, geo)
    sigma = geo.double_sigma_grid()
    order = np.argsort(sigma)
    for xi, want in ((+1, 1), (-1, -1)):
        vals = samples[xi][order]
        loop = np.concatenate([vals, vals[:1]])
        turns = np.sum(np.angle(loop[1:] / loop[:-1])) / (2 * np.pi)
        assert abs(turns - want) < 1e-9


# ---------------------------------------------------------------------------
# the transform and its range
# ---------------------------------------------------------------------------


def test_transform_kills_or_keeps_by_support(small_model):
    geo, cs = small_model.geometry, small_model.cutoffs
    G = small_model.transform.entries
    n_cos = geo.cosphere_space.dim
    rng = np.random.default_rng(5)

    phi = np.where(geo.t_of_s > 4.0, rng.standard_normal(geo.s_grid.size), 0.0)
    out = G @ phi
    assert np.allclose(out[:n_cos], 0.0, atol=1e-14)
    # the cylinder part is exactly phi at the matching grid points
    cyl = out[n_cos:]
    assert abs(np.linalg.norm(cyl) - np.linalg.norm(phi)) < 1e-12

    phi2 = np.where(geo.t_of_s < 1.0, rng.standard_normal(geo.s_grid.size), 0.0)
    out2 = G @ phi2
    assert np.allclose(out2[n_cos:], 0.0, atol=1e-14)
    assert np.linalg.norm(out2[:n_cos]) > 0.1 * np.linalg.norm(phi2)


def test_gram_defect_identity_and_support(small_model):
    geo = small_model.geometry
    gram = (small_model.transform.H @ small_model.transform
            - identity(geo.manifold_space)).entries
    rng = np.random.default_rng(6)
    for _ in range(20):
        phi = np.where(geo.t_of_s > 3.0,
                       rng.standard_normal(geo.s_grid.size)
                       + 1j * rng.standard_normal(geo.s_grid.size), 0.0)
        assert np.linalg.norm(gram @ phi) <= 1e-8 * np.linalg.norm(phi)
    inside = geo.t_of_s <= 3.0
    assert np.max(np.abs(gram[np.ix_(~inside, ~inside)]), initial=0.0) == 0.0
    assert np.max(np.abs(gram[np.ix_(inside, ~inside)]), initial=0.0) <= 1e-30
    assert float(np.linalg.norm(gram)) > 1e-3  # the defect itself is honest


def test_gram_defect_hermitian(small_model):
    gram = (small_model.transform.H @ small_model.transform).entries
    assert np.linalg.norm(gram - gram.conj().T) <= 1e-13


def test_transform_norm_bound(small_model):
    assert small_model.transform.norm2() <= np.sqrt(2.0) * 2.0


def test_toeplitz_projection_properties(small_model):
    rd = small_model.range_data
    geo = small_model.geometry
    P = rd.projection
    assert rd.rank == geo.manifold_space.dim
    assert P.rank() == rd.rank
    assert P.verify_spectrum() <= 1e-9
    # P fixes the range of the transform
    G = small_model.transform.entries
    assert np.linalg.norm(P.op.entries @ G - G) <= 1e-9
    # the surrogate is close but not equal; the report quantifies the gap
    assert 0.0 < rd.surrogate_gap < 1.0
    assert rd.kernel_projection.rank() == 0


def test_toeplitz_projection_of_exact_isometry():
    tag_d = space("dom", range(4))
    rng = np.random.default_rng(7)
    V = np.linalg.qr(rng.standard_normal((9, 4)) + 1j * rng.standard_normal((9, 4)))[0]
    tag_c = space("cod", range(9))
    G = LinearOperator(tag_d, tag_c, V)
    rd = toeplitz_projection(G)
    assert (rd.projection.op - rd.surrogate).norm_fro() <= 1e-12
    assert rd.kernel_projection.rank() == 0


def test_toeplitz_projection_error_paths():
    m = np.diag([1.0, 5e-9, 1e-9])
    with pytest.raises(AmbiguousRank):
        toeplitz_projection(from_matrix(m))
    with pytest.raises(NonInvertibleB):
        toeplitz_projection(from_matrix(np.diag([1.0, 2e-8])))


def test_surrogate_gap_tracks_gram_defect(small_model):
    # |P - G G*| is controlled by the inverse-gram correction G B^-1 K G*
    geo = small_model.geometry
    G = small_model.transform
    K = (G.H @ G - identity(geo.manifold_space)).entries
    bound = np.linalg.norm(G.entries, 2) ** 2 * np.linalg.norm(
        np.linalg.solve((G.H @ G).entries, K)
    )
    assert small_model.range_data.surrogate_gap <= bound + 1e-9


# ---------------------------------------------------------------------------
# quantization
# ---------------------------------------------------------------------------


def test_quantize_unit_is_identity(small_model):
    geo = small_model.geometry
    got = small_model.quantize(ConeSymbol.unit())
    assert (got - identity(geo.manifold_space)).norm2() <= 1e-10


def test_quantize_is_linear(small_model):
    a = ConeSymbol.interior_winding(1)
    b = ConeSymbol.cayley(1)
    combo_int = {k: a.interior[k] * 1.0 for k in a.interior}
    ta = small_model.quantize(a).entries
    tb = small_model.quantize(b).entries
    # linearity over the conormal slot: quantize(a) + quantize(b) equals the
    # assembly of the summed pieces, checked through the public pieces
    geo, cs = small_model.geometry, small_model.cutoffs
    direct = cone_quantize(a, geo, cs).entries + cone_quantize(b, geo, cs).entries
    assert np.allclose(ta + tb, direct, atol=1e-12)


def test_quantize_assembles_two_terms(small_model):
    # interior supported in t < 0 with unit conormal: the quantization is
    # chi2^2 Ahat + chi1^2, each term assembled independently here
    geo, cs = small_model.geometry, small_model.cutoffs
    sym = ConeSymbol.interior_winding(1)
    got = small_model.quantize(sym).entries

    from conelab.cone import _blocks
    b = _blocks(geo, cs)
    circ = transported_circle_symbol(sym, geo)
    ahat = circle_pdo_quantize(circ, b.tr).entries
    psi_mode = (b.dft * cs.psi_on_double()) @ b.dft.conj().T
    embed = b.dft @ b.inject
    interior = (cs.chi2_s**2)[:, None] * (embed.conj().T @ psi_mode @ ahat @ psi_mode @ embed)
    cylinder = np.diag((cs.chi1_s**2).astype(complex))
    assert np.allclose(got, interior + cylinder, atol=1e-10)


def test_quantize_multiplicativity_stabilizes():
    # the composition defect converges to the norm of a fixed compact
    # operator; its singular values decay
    a = ConeSymbol.interior_winding(1) * ConeSymbol.cayley(1)
    b = ConeSymbol.interior_winding(-1) * ConeSymbol.cayley(0, 1)
    defects = {}
    for n in (48, 96):
        g = ConeGeometry(N=n)
        d = (cone_quantize(a * b, g) - cone_quantize(a, g) @ cone_quantize(b, g)).entries
        defects[n] = (np.linalg.norm(d, 2), np.linalg.svd(d, compute_uv=False))
    n1, n2 = defects[48][0], defects[96][0]
    assert abs(n2 - n1) / n1 < 0.01  # stabilized, not exploding
    s = defects[96][1]
    j = np.arange(1, 41)
    assert np.all(s[:40] <= 3.0 * n2 / j)  # compactness witness: decay


def test_quantize_validates_matching(small_model):
    from conelab.errors import MatchingViolation
    from conelab.symbols import InteriorFunction

    bad = ConeSymbol(
        {k: InteriorFunction.constant(2.0) for k in ConeSymbol.unit().interior},
        ConormalFamily.unit(),
    )
    with pytest.raises(MatchingViolation):
        small_model.quantize(bad)


def test_elliptic_symbol_quantization_has_gap(small_model):
    from conelab.linalg import fredholm_defect
    sym = ConeSymbol.interior_winding(1) * ConeSymbol.cayley(-1)
    dec = fredholm_defect(small_model.quantize(sym))
    assert dec.gap > 10 or dec.kernel_dim == 0


# ---------------------------------------------------------------------------
# actions and compression
# ---------------------------------------------------------------------------


def test_action_unit_is_identity(small_model):
    geo = small_model.geometry
    got = small_model.action(ConeSymbol.unit())
    assert (got - identity(geo.hilbert_space)).norm_fro() <= 1e-12


def test_action_block_structure(small_model):
    geo = small_model.geometry
    a = small_model.action(ConeSymbol.cayley(1)).entries
    n_cos = geo.cosphere_space.dim
    assert np.allclose(a[:n_cos, n_cos:], 0.0)
    assert np.allclose(a[n_cos:, :n_cos], 0.0)


def test_toeplitz_quantize_unit(small_model):
    P = small_model.projection
    got = toeplitz_quantize(P, small_model.action, ConeSymbol.unit())
    assert (got - identity(got.domain)).norm2() <= 1e-9


def test_toeplitz_quantize_hardy_shift():
    tr = CircleTruncation(12)
    p_plus, _ = hardy_projections(tr)
    sym = CircleSymbol(TrigPolynomial.mode(1), TrigPolynomial.mode(1))
    comp = toeplitz_quantize(p_plus, lambda s: circle_pdo_quantize(s, tr), sym)
    want = np.diag(np.ones(tr.N), -1)
    assert np.allclose(comp.entries, want, atol=1e-12)


def test_toeplitz_quantize_space_mismatch(small_model):
    tr = CircleTruncation(4)
    p_plus, _ = hardy_projections(tr)
    with pytest.raises(SpaceMismatch):
        toeplitz_quantize(p_plus, small_model.action, ConeSymbol.unit())


def test_compression_composition_controlled_by_commutator():
    # P a P b P - P ab P = P a [P, b] P, so the Schatten-2 norm of the
    # composition defect is bounded by |a| |[P, b]|_2
    tr = CircleTruncation(10)
    p_plus, _ = hardy_projections(tr)
    za = multiplication_operator(TrigPolynomial.mode(1), tr)
    zb = multiplication_operator(TrigPolynomial({1: 0.5, -1: 1.0}), tr)
    P = p_plus.op
    lhs = P @ za @ P @ zb @ P - P @ (za @ zb) @ P
    rhs = P @ za @ (P @ zb - zb @ P) @ P
    assert (lhs - rhs).norm_fro() <= 1e-12
    assert schatten_norm(lhs, 2.0) <= za.norm2() * schatten_norm(P @ zb - zb @ P, 2.0) + 1e-12
