"""Experiment configuration: JSON schema, symbol descriptors, validation.

A config is a single JSON document.  Symbol descriptors support three forms,
combinable by the ``product`` descriptor:

  {"name": "w1",      "interior_winding": [1, 0]}          branch windings
  {"name": "cayley1", "conormal_cayley": [1, 0]}           per-sheet powers
  {"name": "raw",     "interior": {"0,+": [[m, re, im], ...], ...},
                      "conormal": {"sheet0": {"num": [[re, im], ...],
                                              "den": [[re, im], ...]}, ...}}
  {"name": "prod",    "product": ["w1", "cayley1"]}

Interior coefficient lists are trig coefficients in the core ramp half-angle;
conormal coefficient lists are ascending polynomial coefficients in the
cylinder frequency.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .errors import ConfigError, UnknownName
from .geometry import ConeGeometry
from .symbols import (
    ConeSymbol,
    ConormalFamily,
    InteriorFunction,
    RationalFunction,
    SHEETS,
    SIGNS,
)

SUITE_NAMES = ("guillemin", "theorem1", "index", "resolution", "unbounded")


@dataclass
class ExperimentConfig:
    geometry: ConeGeometry
    circle_ns: list
    battery: dict  # name -> ConeSymbol (validated, elliptic where required)
    battery_order: list
    suites: list
    seeds: list
    output_dir: str
    raw: dict = field(default_factory=dict)


def _complex_from_pair(pair, where: str) -> complex:
    if not isinstance(pair, (list, tuple)) or len(pair) != 2:
        raise ConfigError(f"{where}: expected [re, im], got {pair!r}")
    return complex(float(pair[0]), float(pair[1]))


def _parse_rational(d: dict, where: str) -> RationalFunction:
    try:
        num = [_complex_from_pair(c, where + ".num") for c in d["num"]]
        den = [_complex_from_pair(c, where + ".den") for c in d["den"]]
    except KeyError as exc:
        raise ConfigError(f"{where}: missing {exc.args[0]}") from exc
    return RationalFunction(num, den)


_SHEET_SIGN_KEYS = {"0,+": (0, +1), "0,-": (0, -1), "1,+": (1, +1), "1,-": (1, -1)}


def parse_symbol(desc: dict, known: dict) -> ConeSymbol:
    name = desc.get("name", "")
    if "product" in desc:
        factors = desc["product"]
        if not factors:
            raise ConfigError(f"battery[{name}].product: empty factor list")
        sym = None
        for fac in factors:
            if fac not in known:
                raise UnknownName(f"battery[{name}].product: unknown factor {fac!r}")
            sym = known[fac] if sym is None else sym * known[fac]
        return ConeSymbol(sym.interior, sym.conormal, name)
    if "interior_winding" in desc:
        wv = desc["interior_winding"]
        if isinstance(wv, int):
            wv = [wv, 0]
        base = ConeSymbol.interior_winding(int(wv[0]), int(wv[1]), name)
        if "conormal_cayley" in desc:
            pw = desc["conormal_cayley"]
            base = base * ConeSymbol.cayley(int(pw[0]), int(pw[1]))
            base.name = name
        return base
    if "conormal_cayley" in desc:
        pw = desc["conormal_cayley"]
        return ConeSymbol.cayley(int(pw[0]), int(pw[1]), name)
    if "interior" in desc or "conormal" in desc:
        interior = {}
        spec_int = desc.get("interior", {})
        for key, (w, s) in _SHEET_SIGN_KEYS.items():
            if key in spec_int:
                coeffs = {int(row[0]): complex(row[1], row[2]) for row in spec_int[key]}
                interior[(w, s)] = InteriorFunction.from_ramp_coeffs(coeffs)
        if "conormal" in desc:
            fam = ConormalFamily(
                _parse_rational(desc["conormal"]["sheet0"], f"battery[{name}].conormal.sheet0"),
                _parse_rational(desc["conormal"]["sheet1"], f"battery[{name}].conormal.sheet1"),
            )
        else:
            fam = ConormalFamily.unit()
        for w in SHEETS:
            for s in SIGNS:
                if (w, s) not in interior:
                    interior[(w, s)] = InteriorFunction.constant(fam.function(w).limit)
        return ConeSymbol(interior, fam, name)
    if desc.get("unit"):
        return ConeSymbol.unit()
    raise ConfigError(f"battery[{name}]: no recognized symbol form")


def load_config(path: str) -> ExperimentConfig:
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    return parse_config(raw)


def parse_config(raw: dict) -> ExperimentConfig:
    geo_raw = raw.get("geometry", {})
    allowed = {"N", "t_cut", "core_depth", "t_minus", "t_plus"}
    bad = set(geo_raw) - allowed
    if bad:
        raise ConfigError(f"geometry: unknown key(s) {sorted(bad)}")
    try:
        geometry = ConeGeometry(**geo_raw)
    except Exception as exc:
        raise ConfigError(f"geometry: {exc}") from exc

    suites = raw.get("suites", list(SUITE_NAMES))
    for s in suites:
        if s not in SUITE_NAMES:
            raise ConfigError(f"suites: unknown suite {s!r} (choose from {SUITE_NAMES})")

    circle_ns = raw.get("circle_N", [128, 512])
    if not all(isinstance(n, int) and n >= 4 for n in circle_ns):
        raise ConfigError("circle_N: expected a list of integers >= 4")

    battery = {}
    order = []
    for desc in raw.get("battery", []):
        if "name" not in desc:
            raise ConfigError("battery: every entry needs a name")
        name = desc["name"]
        if name in battery:
            raise ConfigError(f"battery: duplicate name {name!r}")
        sym = parse_symbol(desc, battery)
        try:
            sym.validate(t_min=geometry.t_min)
        except Exception as exc:
            raise ConfigError(f"battery[{name}]: {exc}") from exc
        if desc.get("require_elliptic", True) and not sym.is_elliptic():
            raise ConfigError(f"battery[{name}]: symbol is not elliptic")
        battery[name] = sym
        order.append(name)

    seeds = raw.get("seeds", list(range(1, 21)))
    if not all(isinstance(s, int) for s in seeds):
        raise ConfigError("seeds: expected integers")

    return ExperimentConfig(
        geometry=geometry,
        circle_ns=list(circle_ns),
        battery=battery,
        battery_order=order,
        suites=list(suites),
        seeds=list(seeds),
        output_dir=raw.get("output_dir", "conelab-runs"),
        raw=raw,
    )


def describe_symbol(name: str, cfg: ExperimentConfig, t_min: float) -> str:
    from .index import cone_index_oracle, rational_winding

    if name not in cfg.battery:
        raise UnknownName(f"no battery entry named {name!r}")
    sym = cfg.battery[name]
    lines = [f"symbol {name}"]
    lines.append(f"  matching residual: {sym.matching_residual():.2e}")
    lines.append(f"  core continuity residual: {sym.core_continuity_residual(t_min):.2e}")
    lines.append(f"  elliptic: {sym.is_elliptic()}")
    for w in SHEETS:
        fn = sym.conormal.function(w)
        lines.append(
            f"  conormal sheet{w}: deg {fn.num.size - 1}/{fn.den.size - 1}, "
            f"limits {fn.limit:.4g}, winding {rational_winding(fn)}"
        )
    try:
        lines.append(f"  index oracle: {cone_index_oracle(sym)}")
    except Exception as exc:  # non-factorized entries still get described
        lines.append(f"  index oracle: unavailable ({exc})")
    return "\n".join(lines)
