"""Symbols for the cone model: interior part, conormal part, matching.

A symbol is a pair (interior, conormal).  The conormal part is, per sheet, a
scalar rational function of the cylinder frequency p with equal numerator and
denominator degree, so both limits p -> +/-inf exist and coincide.  The
interior part is, per sheet and per cylinder co-direction, a smooth function
of t that is constant for t >= 0 (stabilized) and constant deep in the core.

Matching requires the stabilized interior values to equal the conormal limits.
Continuity through the bottom of the core links the two sheets:
    a_{0,-}(t_min) = a_{1,+}(t_min),   a_{0,+}(t_min) = a_{1,-}(t_min),
because a path through the core flips both the sheet and the co-direction.

Interior winding factors are built on a fixed ramp rho(t): rho = 1 for
t <= -2.75, rho = 0 for t >= -0.25.  Everything is callable-based, so
pointwise products, inverses and conjugates stay exact on any grid.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import MatchingViolation, NotElliptic, PoleOnRealAxis
from .geometry import smootherstep

MATCHING_TOL = 1e-10
RAMP_TOP = -0.25  # rho = 0 above this
RAMP_BOTTOM = -2.75  # rho = 1 below this
SHEETS = (0, 1)
SIGNS = (1, -1)


def core_ramp(t) -> np.ndarray:
    """Monotone C^2 ramp: 1 deep in the core, 0 at and beyond t = -0.25."""
    x = (np.asarray(t, dtype=float) - RAMP_BOTTOM) / (RAMP_TOP - RAMP_BOTTOM)
    return 1.0 - smootherstep(x)


# ---------------------------------------------------------------------------
# conormal part
# ---------------------------------------------------------------------------


def _trim(coeffs) -> np.ndarray:
    c = np.asarray(coeffs, dtype=np.complex128).ravel()
    nz = np.nonzero(np.abs(c) > 0)[0]
    if nz.size == 0:
        return np.zeros(1, dtype=np.complex128)
    return c[: nz[-1] + 1]


@dataclass(frozen=True)
class RationalFunction:
    """num(p)/den(p), coefficients ascending, deg num = deg den, den real-root free."""

    num: np.ndarray
    den: np.ndarray

    def __init__(self, num, den):
        num = _trim(num)
        den = _trim(den)
        if den.size == 1 and den[0] == 0:
            raise PoleOnRealAxis("zero denominator")
        if num.size != den.size and np.any(np.abs(num) > 0):
            raise MatchingViolation(
                f"numerator degree {num.size - 1} != denominator degree {den.size - 1}; "
                "limits at p = +/-inf would not match"
            )
        object.__setattr__(self, "num", num)
        object.__setattr__(self, "den", den)
        self._check_poles()

    def _check_poles(self):
        if self.den.size > 1:
            roots = np.roots(self.den[::-1])
            dist = np.min(np.abs(roots.imag)) if roots.size else np.inf
            if dist < 1e-9 * max(1.0, np.max(np.abs(roots))):
                raise PoleOnRealAxis(f"denominator root within {dist:.3e} of the real axis")
        p = np.linspace(-1e3, 1e3, 4001)
        vals = np.abs(np.polynomial.polynomial.polyval(p, self.den))
        if vals.min() < 1e-12 * max(1.0, vals.max()):
            raise PoleOnRealAxis("denominator nearly vanishes on the sampled real axis")

    @classmethod
    def constant(cls, c) -> "RationalFunction":
        return cls([complex(c)], [1.0])

    @classmethod
    def cayley(cls, power: int = 1) -> "RationalFunction":
        """((p - i)/(p + i))^power; winding = power."""
        one = cls([-1j, 1.0], [1j, 1.0])
        out = cls.constant(1.0)
        for _ in range(abs(int(power))):
            out = out * (one if power > 0 else one.inverse())
        return out

    def __call__(self, p) -> np.ndarray:
        p = np.asarray(p, dtype=float)
        pv = np.polynomial.polynomial.polyval
        return pv(p, self.num) / pv(p, self.den)

    @property
    def limit(self) -> complex:
        """Common value of the limits at p -> +inf and p -> -inf."""
        if np.all(np.abs(self.num) == 0):
            return 0j
        return complex(self.num[-1] / self.den[-1])

    def __mul__(self, other: "RationalFunction") -> "RationalFunction":
        conv = np.convolve
        return RationalFunction(conv(self.num, other.num), conv(self.den, other.den))

    def inverse(self) -> "RationalFunction":
        return RationalFunction(self.den, self.num)

    def conjugate(self) -> "RationalFunction":
        return RationalFunction(np.conj(self.num), np.conj(self.den))

    def nonvanishing(self) -> bool:
        p = np.linspace(-1e3, 1e3, 8001)
        vals = np.abs(self(p))
        floor = 1e-12 * max(1.0, float(vals.max()))
        return bool(vals.min() > floor and abs(self.limit) > floor)


@dataclass(frozen=True)
class ConormalFamily:
    """One rational function per sheet of the cone base."""

    sheet0: RationalFunction
    sheet1: RationalFunction

    @classmethod
    def unit(cls) -> "ConormalFamily":
        return cls(RationalFunction.constant(1.0), RationalFunction.constant(1.0))

    def function(self, sheet: int) -> RationalFunction:
        return self.sheet1 if sheet == 1 else self.sheet0

    def limits(self) -> dict:
        """The four limiting values, keyed by (sheet, sign)."""
        return {
            (w, s): self.function(w).limit for w in SHEETS for s in SIGNS
        }

    def __mul__(self, other: "ConormalFamily") -> "ConormalFamily":
        return ConormalFamily(self.sheet0 * other.sheet0, self.sheet1 * other.sheet1)

    def inverse(self) -> "ConormalFamily":
        return ConormalFamily(self.sheet0.inverse(), self.sheet1.inverse())

    def conjugate(self) -> "ConormalFamily":
        return ConormalFamily(self.sheet0.conjugate(), self.sheet1.conjugate())


# ---------------------------------------------------------------------------
# interior part
# ---------------------------------------------------------------------------


class InteriorFunction:
    """Scalar function of t, stored as a callable with exact pointwise algebra."""

    def __init__(self, fn):
        self._fn = fn

    def __call__(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        out = np.asarray(self._fn(t), dtype=np.complex128)
        return np.broadcast_to(out, t.shape).copy() if out.shape != t.shape else out

    @classmethod
    def constant(cls, c) -> "InteriorFunction":
        c = complex(c)
        return cls(lambda t: np.full(np.shape(t), c, dtype=np.complex128))

    @classmethod
    def half_winding(cls, half_turns: int) -> "InteriorFunction":
        """exp(i pi k rho(t)): k half-turns along the core ramp."""
        k = int(half_turns)
        return cls(lambda t: np.exp(1j * np.pi * k * core_ramp(t)))

    @classmethod
    def from_ramp_coeffs(cls, coeffs) -> "InteriorFunction":
        """sum_m c_m exp(i pi m rho(t)): trig polynomial in the ramp half-angle."""
        pairs = [(int(m), complex(c)) for m, c in dict(coeffs).items()]

        def fn(t):
            u = np.pi * core_ramp(t)
            out = np.zeros(np.shape(t), dtype=np.complex128)
            for m, c in pairs:
                out += c * np.exp(1j * m * u)
            return out

        return cls(fn)

    def __mul__(self, other: "InteriorFunction") -> "InteriorFunction":
        return InteriorFunction(lambda t, a=self, b=other: a(t) * b(t))

    def inverse(self) -> "InteriorFunction":
        return InteriorFunction(lambda t, a=self: 1.0 / a(t))

    def conjugate(self) -> "InteriorFunction":
        return InteriorFunction(lambda t, a=self: np.conj(a(t)))

    def scaled(self, c) -> "InteriorFunction":
        c = complex(c)
        return InteriorFunction(lambda t, a=self: c * a(t))


class ConeSymbol:
    """(interior, conormal) pair with validation of matching and ellipticity."""

    def __init__(self, interior: dict, conormal: ConormalFamily, name: str = ""):
        self.interior = {
            (w, s): interior[(w, s)] for w in SHEETS for s in SIGNS
        }
        self.conormal = conormal
        self.name = name

    # ---- constructors --------------------------------------------------------

    @classmethod
    def unit(cls) -> "ConeSymbol":
        one = InteriorFunction.constant(1.0)
        return cls({(w, s): one for w in SHEETS for s in SIGNS}, ConormalFamily.unit(), "unit")

    @classmethod
    def interior_winding(cls, plus_branch: int, minus_branch: int = 0, name: str = "") -> "ConeSymbol":
        """Interior factor supported in t < 0 with prescribed branch windings.

        The +xi branch of the cosphere winds ``plus_branch`` times as the arc
        length runs over the whole line, the -xi branch ``minus_branch`` times;
        each sheet carries half of a branch's phase travel.
        """
        w, v = int(plus_branch), int(minus_branch)
        interior = {
            (1, +1): InteriorFunction.half_winding(-w),
            (0, -1): InteriorFunction.half_winding(+w),
            (1, -1): InteriorFunction.half_winding(-v),
            (0, +1): InteriorFunction.half_winding(+v),
        }
        return cls(interior, ConormalFamily.unit(), name or f"wind({w},{v})")

    @classmethod
    def conormal_symbol(cls, family: ConormalFamily, name: str = "") -> "ConeSymbol":
        """Pure conormal symbol: interior identically equal to the limits."""
        interior = {
            (w, s): InteriorFunction.constant(family.function(w).limit)
            for w in SHEETS
            for s in SIGNS
        }
        return cls(interior, family, name or "conormal")

    @classmethod
    def cayley(cls, power_sheet1: int = 1, power_sheet0: int = 0, name: str = "") -> "ConeSymbol":
        fam = ConormalFamily(
            RationalFunction.cayley(power_sheet0), RationalFunction.cayley(power_sheet1)
        )
        return cls.conormal_symbol(fam, name or f"cayley({power_sheet1},{power_sheet0})")

    # ---- algebra -------------------------------------------------------------

    def __mul__(self, other: "ConeSymbol") -> "ConeSymbol":
        interior = {k: self.interior[k] * other.interior[k] for k in self.interior}
        nm = f"{self.name}*{other.name}" if self.name and other.name else ""
        return ConeSymbol(interior, self.conormal * other.conormal, nm)

    def inverse(self) -> "ConeSymbol":
        interior = {k: f.inverse() for k, f in self.interior.items()}
        nm = f"{self.name}^-1" if self.name else ""
        return ConeSymbol(interior, self.conormal.inverse(), nm)

    # ---- validation ------------------------------------------------------------

    def stabilized_value(self, sheet: int, sign: int) -> complex:
        probe = self.interior[(sheet, sign)](np.array([0.0, 2.0, 7.5]))
        if np.max(np.abs(probe - probe[0])) > MATCHING_TOL * max(1.0, abs(probe[0])):
            raise MatchingViolation(
                f"interior ({sheet},{sign:+d}) not constant for t >= 0: {probe}"
            )
        return complex(probe[0])

    def matching_residual(self) -> float:
        lims = self.conormal.limits()
        res = 0.0
        for w in SHEETS:
            for s in SIGNS:
                res = max(res, abs(self.stabilized_value(w, s) - lims[(w, s)]))
        return res

    def core_continuity_residual(self, t_min: float) -> float:
        a = self.interior
        r1 = abs(complex(a[(0, -1)](np.array([t_min]))[0]) - complex(a[(1, +1)](np.array([t_min]))[0]))
        r2 = abs(complex(a[(0, +1)](np.array([t_min]))[0]) - complex(a[(1, -1)](np.array([t_min]))[0]))
        return max(r1, r2)

    def validate(self, t_min: float = -3.25, tol: float = MATCHING_TOL):
        res = self.matching_residual()
        if res > tol:
            raise MatchingViolation(f"matching residual {res:.3e} exceeds {tol:g}")
        cont = self.core_continuity_residual(t_min)
        if cont > tol:
            raise MatchingViolation(f"core continuity residual {cont:.3e} exceeds {tol:g}")
        deep = np.linspace(-19.0, -3.0, 33)
        for key, f in self.interior.items():
            vals = f(deep)
            if np.max(np.abs(vals - vals[0])) > tol * max(1.0, abs(vals[0])):
                raise MatchingViolation(f"interior {key} not constant deep in the core")

    def is_elliptic(self) -> bool:
        t = np.linspace(-20.0, 10.0, 2401)
        for f in self.interior.values():
            vals = np.abs(f(t))
            if vals.min() <= 1e-12 * max(1.0, vals.max()):
                return False
        return all(self.conormal.function(w).nonvanishing() for w in SHEETS)

    def require_elliptic(self):
        if not self.is_elliptic():
            raise NotElliptic(f"symbol {self.name or '<anon>'} has a vanishing component")

    def __repr__(self):
        return f"ConeSymbol({self.name or '<anon>'})"
