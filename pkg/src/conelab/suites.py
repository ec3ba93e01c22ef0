"""The five verification suites behind the batch runner.

Each suite appends rows (suite, assertion, symbol, truncation, value,
threshold, verdict) to an ExperimentReport; thresholds are the acceptance
tolerances, fixed here rather than configurable.
"""

from __future__ import annotations

import numpy as np

from .circle import (
    CircleTruncation,
    TrigPolynomial,
    guillemin_transform_circle,
    hardy_projections,
    multiplication_operator,
    szego_projection,
)
from .cone import ConeModel, multiplier_leakage
from .config import ExperimentConfig
from .errors import ConelabError
from .geometry import ConeGeometry
from .index import (
    cone_index_oracle,
    index_via_character,
    winding_number,
)
from .linalg import (
    LinearOperator,
    direct_sum_space,
    identity,
    space,
    spectral_function,
)
from .report import FAIL, INCONCLUSIVE, PASS, ExperimentReport, check
from .resolution import (
    UnboundedResolution,
    bounded_normalization,
    dual_projection,
    equivalence_test,
    hardy_resolution,
    inverse_sqrt_quadrature,
    roll_up,
    synth_resolution,
    unbounded_roll_up_check,
)


# ---------------------------------------------------------------------------
# battery plumbing shared by resolution-style suites
# ---------------------------------------------------------------------------


class MatrixTrigSymbol:
    """2x2 matrix of trig polynomials with an explicitly supplied inverse."""

    def __init__(self, entries, inverse, name):
        self.entries = entries
        self.inverse = inverse
        self.name = name


def standard_resolution_battery():
    """Shift battery plus one triangular 2x2 entry; six elliptic symbols."""
    entries = []
    for k in (-2, -1, 1, 2):
        entries.append((TrigPolynomial.mode(k), TrigPolynomial.mode(-k), f"z^{k}"))
    z, zi = TrigPolynomial.mode(1), TrigPolynomial.mode(-1)
    c = TrigPolynomial.constant(0.3)
    zero = TrigPolynomial.constant(0.0)
    m = MatrixTrigSymbol(
        [[z, zero], [c, z]],
        [[zi, zero], [(-1) * c * zi * zi, zi]],
        "tri2(z)",
    )
    entries.append((m, m, "tri2(z)"))
    entries.append((TrigPolynomial.mode(1) * 2.0, TrigPolynomial.mode(-1) * 0.5, "2z"))
    return entries


def make_side_action(base_action):
    """Lift a scalar-symbol action to matrix symbols by block assembly."""

    def act(sym):
        if isinstance(sym, MatrixTrigSymbol):
            blocks = [[base_action(b).entries for b in row] for row in sym.entries]
            op0 = base_action(sym.entries[0][0])
            tag = direct_sum_space(f"{op0.domain.name}^2", op0.domain, op0.domain)
            return LinearOperator(tag, tag, np.block(blocks))
        return base_action(sym)

    return act


def _battery_pairs(battery):
    """Normalize entries to (forward, inverse, name) with matrix support."""
    out = []
    for sym, sym_inv, name in battery:
        if isinstance(sym, MatrixTrigSymbol):
            out.append((sym, MatrixTrigSymbol(sym.inverse, sym.entries, name), name))
        else:
            out.append((sym, sym_inv, name))
    return out


# ---------------------------------------------------------------------------
# guillemin suite
# ---------------------------------------------------------------------------


def run_guillemin(cfg: ExperimentConfig, report: ExperimentReport, model: ConeModel):
    for n in cfg.circle_ns:
        tr = CircleTruncation(n)
        T = guillemin_transform_circle(tr)
        defect = (T.H @ T - identity(tr.space)).norm2()
        report.add("guillemin", "transform_isometry", "-", f"N={n}", defect, 1e-12,
                   check(defect, 1e-12))
        pi = szego_projection(tr)
        idem = (pi.op @ pi.op - pi.op).norm2()
        report.add("guillemin", "szego_idempotent", "-", f"N={n}", idem, 1e-12,
                   check(idem, 1e-12))

    geo = model.geometry
    label = geo.truncation_label()
    G = model.transform
    gram_defect = G.H @ G - identity(geo.manifold_space)
    rng = np.random.default_rng(7)
    mask = geo.t_of_s > 3.0
    worst = 0.0
    for _ in range(20):
        phi = np.where(mask, rng.standard_normal(mask.size) + 1j * rng.standard_normal(mask.size), 0.0)
        worst = max(worst, float(np.linalg.norm(gram_defect.entries @ phi) / np.linalg.norm(phi)))
    report.add("guillemin", "gram_identity_outside_core", "-", label, worst, 1e-8,
               check(worst, 1e-8))

    inside = geo.t_of_s <= 3.0
    outside_block = gram_defect.entries[np.ix_(~inside, ~inside)]
    cross = max(
        float(np.abs(gram_defect.entries[np.ix_(~inside, inside)]).max(initial=0.0)),
        float(np.abs(gram_defect.entries[np.ix_(inside, ~inside)]).max(initial=0.0)),
        float(np.abs(outside_block).max(initial=0.0)),
    )
    report.add("guillemin", "gram_defect_support", "-", label, cross, 1e-14,
               check(cross, 1e-14))

    norm_bound = np.sqrt(2.0) * 2.0  # sqrt(2) (1 + |psi|_inf)
    gnorm = G.norm2()
    report.add("guillemin", "transform_bounded", "-", label, gnorm, norm_bound,
               check(gnorm, norm_bound))


# ---------------------------------------------------------------------------
# theorem1 suite
# ---------------------------------------------------------------------------


def run_theorem1(cfg: ExperimentConfig, report: ExperimentReport, model: ConeModel,
                 doubled: ConeModel | None = None):
    geo = model.geometry
    label = geo.truncation_label()
    if doubled is None:
        doubled = ConeModel(geo.doubled())
    label2 = doubled.geometry.truncation_label()

    # commutator decay of the gram defect, with the fitted j^-2 constant
    defect = (model.transform.H @ model.transform - identity(geo.manifold_space)).entries
    sing = np.linalg.svd(defect, compute_uv=False)
    sing2 = np.linalg.svd(
        (doubled.transform.H @ doubled.transform - identity(doubled.geometry.manifold_space)).entries,
        compute_uv=False,
    )

    def decay_constant(s):
        j = np.arange(1, min(s.size, 200) + 1)
        return float(np.max(s[: j.size] * j**2))

    c1, c2 = decay_constant(sing), decay_constant(sing2)
    ratio = c2 / max(c1, 1e-300)
    report.add("theorem1", "gram_defect_sv_decay_stable", "-", f"{label}->{label2}",
               ratio, 2.0, check(ratio, 2.0))

    P1, P2 = model.projection, doubled.projection
    for name in cfg.battery_order:
        sym = cfg.battery[name]
        a1 = model.action(sym)
        comm1 = float(np.linalg.norm(P1.op.entries @ a1.entries - a1.entries @ P1.op.entries))
        a2 = doubled.action(sym)
        comm2 = float(np.linalg.norm(P2.op.entries @ a2.entries - a2.entries @ P2.op.entries))
        rel = abs(comm2 - comm1) / max(comm1, 1e-300) if comm1 > 1e-12 else 0.0
        report.add("theorem1", "commutator_s2_stable", name, f"{label}->{label2}",
                   rel, 0.01, check(rel, 0.01))

        d1 = float(np.linalg.norm(model.transform_conjugate(sym).entries
                                  - model.quantize(sym).entries))
        d2 = float(np.linalg.norm(doubled.transform_conjugate(sym).entries
                                  - doubled.quantize(sym).entries))
        rel_eq = abs(d2 - d1) / max(d1, 1e-300) if d1 > 1e-10 else 0.0
        report.add("theorem1", "quantization_equiv_stable", name, f"{label}->{label2}",
                   rel_eq, 0.02, check(rel_eq, 0.02))

        leak = multiplier_leakage(sym.conormal, geo)
        report.add("theorem1", "multiplier_leakage", name, label, leak, 1e-8,
                   check(leak, 1e-8))


# ---------------------------------------------------------------------------
# index suite
# ---------------------------------------------------------------------------


def run_index(cfg: ExperimentConfig, report: ExperimentReport, model: ConeModel):
    n = max(cfg.circle_ns)
    tr = CircleTruncation(n)
    p_plus, _ = hardy_projections(tr)
    theta = np.linspace(0, 2 * np.pi, 64, endpoint=False)
    for k in range(-3, 4):
        sym = TrigPolynomial.mode(k)
        rep = index_via_character(
            p_plus, multiplication_operator(sym, tr), multiplication_operator(sym.conjugate(), tr),
            N=1, symbol=f"z^{k}",
        )
        oracle = -winding_number(np.exp(1j * k * theta)) if k != 0 else 0
        ok = rep.conclusive and rep.rounded == oracle and rep.residual < 1e-6
        report.add("index", "circle_index_vs_winding", f"z^{k}", f"N={n}",
                   rep.residual if ok else abs(rep.rounded - oracle) + rep.residual,
                   1e-6, PASS if ok else FAIL)

    P = model.projection
    label = model.geometry.truncation_label()
    for name in cfg.battery_order:
        sym = cfg.battery[name]
        try:
            oracle = cone_index_oracle(sym)
        except ConelabError:
            continue  # non-factorized entries are exercised elsewhere
        # commutators here are only Schatten-summable above exponent one, so
        # the shortest justified character has three commutator slots
        rep = index_via_character(
            P, model.action(sym), model.action(sym.inverse()), N=3, symbol=name
        )
        if not rep.conclusive:
            report.add("index", "cone_index_vs_oracle", name, label, rep.residual, 0.1,
                       INCONCLUSIVE)
            continue
        verdict = PASS if rep.rounded == oracle else FAIL
        report.add("index", "cone_index_vs_oracle", name, label, rep.residual, 0.1, verdict)


# ---------------------------------------------------------------------------
# resolution suite
# ---------------------------------------------------------------------------


def _equivalence_rows(report, res, battery, label, suite="resolution"):
    rolled = roll_up(res)
    side_p = (res.P, make_side_action(lambda s: res.action(s, 0)))
    side_d = (rolled, make_side_action(res.sum_action))
    cells = equivalence_test(side_p, side_d, _battery_pairs(battery))
    for cell in cells:
        if not cell.conclusive:
            verdict = INCONCLUSIVE
            value = max(cell.left.residual, cell.right.residual)
        else:
            verdict = PASS if cell.equal else FAIL
            value = abs(cell.left.rounded - cell.right.rounded)
        report.add(suite, "index_equality", f"{res.name}:{cell.symbol}", label,
                   value, 0.1, verdict)


def run_resolution(cfg: ExperimentConfig, report: ExperimentReport, jobs: int = 1):
    battery = standard_resolution_battery()

    def hardy_cell(length):
        local = []
        res = hardy_resolution(length, N=24)
        _equivalence_rows(_RowSink(local), res, battery, "hardy:N=24")
        return local

    def synth_cell(args):
        seed, length = args
        local = []
        res = synth_resolution(seed, length=length, N=12)
        _equivalence_rows(_RowSink(local), res, battery, f"synth:N=12,seed={seed}")
        return local

    cells = list(_pmap(hardy_cell, [0, 1, 2, 3], jobs))
    cells += list(_pmap(synth_cell, [(s, n) for s in cfg.seeds for n in (0, 1, 2, 3)], jobs))
    for rows in cells:
        for args in rows:
            report.add(*args)


class _RowSink:
    """Collects report.add(...) calls so cells can run concurrently."""

    def __init__(self, store):
        self._store = store

    def add(self, *args):
        self._store.append(args)


def _pmap(fn, items, jobs: int):
    if jobs <= 1:
        return [fn(x) for x in items]
    from concurrent.futures import ThreadPoolExecutor

    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


# ---------------------------------------------------------------------------
# unbounded suite
# ---------------------------------------------------------------------------


def unbounded_battery(N: int = 24):
    """Three chain instances with genuinely large map norms, plus a zero chain."""
    tr = CircleTruncation(N)
    modes = tr.modes
    action = lambda sym, j: multiplication_operator(sym, tr)
    out = []

    # Hardy variant: A_0 = diag(n) P_- (unbounded as N grows)
    a0 = LinearOperator(tr.space, tr.space,
                        np.diag(np.where(modes < 0, modes, 0).astype(np.complex128)))
    out.append(UnboundedResolution([tr.space, tr.space], [a0], action, name="hardy-diag"))

    # diagonal two-step chain on complementary mode sets with growing weights
    up = modes >= 3
    a0 = LinearOperator(tr.space, tr.space,
                        np.diag(np.where(~up, 1.0 + modes.astype(float) ** 2, 0.0)))
    a1 = LinearOperator(tr.space, tr.space,
                        np.diag(np.where(up, 5.0 + np.abs(modes).astype(float) ** 3, 0.0)))
    out.append(
        UnboundedResolution([tr.space] * 3, [a0, a1], action, name="diag-growth")
    )

    # synthetic bounded chain rescaled by large positive diagonals
    res = synth_resolution(5, length=2, N=N // 2)
    tr2 = CircleTruncation(N // 2)
    action2 = lambda sym, j: multiplication_operator(sym, tr2)
    scale = np.diag((1.0 + np.abs(tr2.modes) ** 2).astype(np.complex128))
    maps = [LinearOperator(A.domain, A.codomain, scale @ A.entries) for A in res.maps]
    out.append(UnboundedResolution(res.spaces, maps, action2, name="synth-scaled"))

    # the same chain conjugated by seeded unitaries, so nothing is diagonal
    rng = np.random.default_rng(17)
    us = []
    for _ in range(3):
        g = rng.standard_normal((tr2.dim, tr2.dim)) + 1j * rng.standard_normal((tr2.dim, tr2.dim))
        us.append(np.linalg.qr(g)[0])
    rot = [
        LinearOperator(A.domain, A.codomain, us[j + 1] @ A.entries @ us[j].conj().T)
        for j, A in enumerate(maps)
    ]
    out.append(UnboundedResolution(res.spaces, rot, action2, name="synth-rotated"))
    return out


def run_unbounded(cfg: ExperimentConfig, report: ExperimentReport):
    for res in unbounded_battery():
        chk = unbounded_roll_up_check(res)
        report.add("unbounded", "positive_projection_match", res.name, "-",
                   chk["projection_gap"], 1e-8, check(chk["projection_gap"], 1e-8))
        report.add("unbounded", "normalization_identity", res.name, "-",
                   chk["normalization_identity_defect"], 1e-8,
                   check(chk["normalization_identity_defect"], 1e-8))
        bounded = bounded_normalization(res)
        gap = (dual_projection(bounded).op - res.dual_projection().op).norm2()
        report.add("unbounded", "dual_projection_preserved", res.name, "-",
                   gap, 1e-8, check(gap, 1e-8))

    # quadrature cross-check over a representative spread of spectra
    rng = np.random.default_rng(11)
    lam = np.concatenate([[0.0], np.geomspace(1e-3, 1e4, 38)])
    q = np.linalg.qr(rng.standard_normal((lam.size, lam.size))
                     + 1j * rng.standard_normal((lam.size, lam.size)))[0]
    tag = space(f"quadcheck[{lam.size}]", range(lam.size))
    delta = LinearOperator(tag, tag, (q * lam) @ q.conj().T)
    quad = inverse_sqrt_quadrature(delta, nodes=200)
    spec = spectral_function(delta, lambda x: 1.0 / np.sqrt(1.0 + max(x, 0.0)))
    err = (quad - spec).norm2()
    report.add("unbounded", "inverse_sqrt_quadrature", "-", "nodes=200", err, 1e-6,
               check(err, 1e-6))


# ---------------------------------------------------------------------------
# entry point used by the CLI
# ---------------------------------------------------------------------------


def run_suites(cfg: ExperimentConfig, report: ExperimentReport, jobs: int = 1):
    needs_model = {"guillemin", "theorem1", "index"} & set(cfg.suites)
    model = ConeModel(cfg.geometry) if needs_model else None
    doubled = ConeModel(cfg.geometry.doubled()) if "theorem1" in cfg.suites else None
    if "guillemin" in cfg.suites:
        run_guillemin(cfg, report, model)
    if "theorem1" in cfg.suites:
        run_theorem1(cfg, report, model, doubled)
    if "index" in cfg.suites:
        run_index(cfg, report, model)
    if "resolution" in cfg.suites:
        run_resolution(cfg, report, jobs)
    if "unbounded" in cfg.suites:
        run_unbounded(cfg, report)
