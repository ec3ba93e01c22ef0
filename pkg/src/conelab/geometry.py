"""Geometry of the one-dimensional cone model and its discretization.

The manifold minus its conical point is a line with arc-length coordinate s;
the two ends (s -> +/-inf) are the two half-cylinders of the cone
neighbourhood, one per base point.  The cylindrical coordinate is

    t(s) = |s| - core_depth            for |s| >= 2,

with the corner at s = 0 replaced by an even quartic matched to first order
at |s| = 2, so t is C^1, has a single minimum t_min = 0.75 - core_depth, and
t <= 0 exactly on the compact core |s| < core_depth.

The double is built by cutting at t = t_cut and gluing a mirror copy, giving
a circle of circumference C = 4 (t_cut + core_depth).  All grids nest:

  * the circle collocation grid has 2N+1 points, step h = C / (2N+1);
  * the manifold grid is s = k h, |k| <= K, so it injects into the circle grid;
  * the cylinder grid is t = j h - core_depth, which contains t(s) for every
    grid point with |s| >= 2; the embedding of cutoff data is therefore exact.

Sheet 1 is s > 0, sheet 0 is s < 0.  On sheet 1 the cylinder frequency p is
the cotangent coordinate of the line; on sheet 0 the orientation flips.
"""

from __future__ import annotations

import numpy as np

from .errors import GridMismatch
from .linalg import SpaceTag, direct_sum_space, space

CORE_SMOOTHING_HALFWIDTH = 2.0


def smootherstep(x) -> np.ndarray:
    """Quintic ramp: 0 below 0, 1 above 1, C^2 across both ends."""
    x = np.clip(np.asarray(x, dtype=float), 0.0, 1.0)
    return x * x * x * (x * (6.0 * x - 15.0) + 10.0)


class ConeGeometry:
    """Derived grids and space tags for one resolution of the cone model."""

    def __init__(
        self,
        N: int = 192,
        t_cut: float = 10.0,
        core_depth: float = 4.0,
        t_minus: float = 20.0,
        t_plus: float = 15.0,
    ):
        if t_plus <= t_cut:
            raise GridMismatch(f"t_plus={t_plus} must exceed t_cut={t_cut}")
        if core_depth <= CORE_SMOOTHING_HALFWIDTH + 0.5:
            raise GridMismatch("core_depth too shallow for the smoothing window")
        self.N = int(N)
        self.t_cut = float(t_cut)
        self.core_depth = float(core_depth)
        self.t_minus = float(t_minus)
        self.t_plus = float(t_plus)

        self.s_cut = self.t_cut + self.core_depth  # |s| at the gluing locus
        self.circumference = 4.0 * self.s_cut
        self.n_double = 2 * self.N + 1
        self.h = self.circumference / self.n_double

        # manifold grid s_k = k h, k = -K..K, chosen so max t(s) ~ t_plus
        self.K = int(round((self.t_plus + self.core_depth) / self.h))
        self.s_indices = np.arange(-self.K, self.K + 1)
        self.s_grid = self.s_indices * self.h
        self.t_plus_eff = self.K * self.h - self.core_depth

        # cylinder grid t_j = j h - core_depth, j = j_min..K (two sheets)
        self.j_min = -int(np.ceil((self.t_minus - self.core_depth) / self.h))
        self.t_indices = np.arange(self.j_min, self.K + 1)
        self.t_grid = self.t_indices * self.h - self.core_depth
        self.n_t = self.t_grid.size

        self.t_of_s = self.t_profile(self.s_grid)
        self.sheet_of_s = np.where(self.s_indices >= 0, 1, 0)

        n = self.N
        self.manifold_space: SpaceTag = space(
            f"L2(M)[N={N}]", [int(k) for k in self.s_indices]
        )
        self.double_space: SpaceTag = space(
            f"L2(2M)[N={N}]", [int(m) for m in range(-n, n + 1)]
        )
        cos_labels = [("+", int(m)) for m in range(-n, n + 1)] + [
            ("-", int(m)) for m in range(-n, n + 1)
        ]
        self.cosphere_space: SpaceTag = space(f"L2(S*2M)[N={N}]", cos_labels)
        cyl_labels = [(1, int(j)) for j in self.t_indices] + [
            (0, int(j)) for j in self.t_indices
        ]
        self.cylinder_space: SpaceTag = space(f"L2(C)[N={N}]", cyl_labels)
        self.hilbert_space: SpaceTag = direct_sum_space(
            f"Htilde[N={N}]", self.cosphere_space, self.cylinder_space
        )

    # ---- profile -----------------------------------------------------------

    def t_profile(self, s) -> np.ndarray:
        """Cylindrical coordinate as a function of arc length."""
        s = np.asarray(s, dtype=float)
        a = CORE_SMOOTHING_HALFWIDTH
        # quartic with value a - core_depth, slope 1, curvature 0 at |s| = a
        out = np.abs(s) - self.core_depth
        inner = np.abs(s) <= a
        si = s[inner]
        out = np.array(out)
        out[inner] = (0.75 - self.core_depth) + 0.375 * si**2 - 0.015625 * si**4
        return out

    @property
    def t_min(self) -> float:
        return 0.75 - self.core_depth

    # ---- grid maps -----------------------------------------------------------

    def double_sigma_grid(self) -> np.ndarray:
        """Arc-length positions of the circle collocation points, in (-C/2, C/2]."""
        sigma = np.arange(self.n_double) * self.h
        return np.where(sigma > self.circumference / 2.0, sigma - self.circumference, sigma)

    def double_t_values(self) -> np.ndarray:
        """t at each circle collocation point (mirror profile on the glued copy)."""
        sigma = self.double_sigma_grid()
        s_eff = np.where(
            np.abs(sigma) <= self.s_cut,
            sigma,
            np.sign(sigma) * (2.0 * self.s_cut - np.abs(sigma)),
        )
        return self.t_profile(s_eff)

    def double_copy2_mask(self) -> np.ndarray:
        return np.abs(self.double_sigma_grid()) > self.s_cut

    def manifold_to_double_indices(self) -> np.ndarray:
        """Circle-grid index of each manifold grid point (s = sigma mod C)."""
        if self.K >= self.n_double:
            raise GridMismatch("manifold grid wraps the double more than once")
        return np.mod(self.s_indices, self.n_double)

    def doubled(self) -> "ConeGeometry":
        """The standard refinement: N -> 2N (and hence h -> h/2)."""
        return ConeGeometry(
            N=2 * self.N,
            t_cut=self.t_cut,
            core_depth=self.core_depth,
            t_minus=self.t_minus,
            t_plus=self.t_plus,
        )

    def truncation_label(self) -> str:
        return f"N={self.N},h={self.h:.5f}"

    def __repr__(self):
        return (
            f"ConeGeometry(N={self.N}, h={self.h:.5f}, dimM={self.manifold_space.dim}, "
            f"dimH={self.hilbert_space.dim})"
        )


class CutoffSystem:
    """The three cutoffs chi1, chi2, psi as functions of t.

    chi1^2 + chi2^2 = 1 holds pointwise exactly by construction; chi1 ramps
    on [1, 3] (0 below, 1 above), psi steps down on [3.5, 4], so psi chi2 = chi2.
    """

    def __init__(self, geometry: ConeGeometry):
        self.geometry = geometry
        self.chi1_s = self.chi1(geometry.t_of_s)
        self.chi2_s = self.chi2(geometry.t_of_s)
        self.psi_s = self.psi(geometry.t_of_s)
        self.chi1_t = self.chi1(geometry.t_grid)

    @staticmethod
    def chi1(t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        angle = np.clip((t - 1.0) / 2.0, 0.0, 1.0) * (np.pi / 2.0)
        u = np.sin(angle) ** 2
        v = np.cos(angle) ** 2
        ramp = u / np.sqrt(u * u + v * v)
        # exact plateaus: cos(pi/2) in floats is only ~6e-17
        return np.where(t <= 1.0, 0.0, np.where(t >= 3.0, 1.0, ramp))

    @staticmethod
    def chi2(t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        angle = np.clip((t - 1.0) / 2.0, 0.0, 1.0) * (np.pi / 2.0)
        u = np.sin(angle) ** 2
        v = np.cos(angle) ** 2
        ramp = v / np.sqrt(u * u + v * v)
        return np.where(t <= 1.0, 1.0, np.where(t >= 3.0, 0.0, ramp))

    @staticmethod
    def psi(t) -> np.ndarray:
        return 1.0 - smootherstep((np.asarray(t, dtype=float) - 3.5) / 0.5)

    def psi_on_double(self) -> np.ndarray:
        """psi at the circle collocation points, constant 0 on the glued copy."""
        vals = self.psi(self.geometry.double_t_values())
        vals = np.where(self.geometry.double_copy2_mask(), 0.0, vals)
        return vals

    def partition_defect(self) -> float:
        vals = self.chi1_s**2 + self.chi2_s**2 - 1.0
        return float(np.max(np.abs(vals))) if vals.size else 0.0
