"""conelab: Toeplitz quantization of elliptic operators on a 1-D cone,
verified at finite spectral truncation.

The library is organized around six pieces:

* :mod:`conelab.linalg` - dense operator engine (spectra, Schatten norms,
  rank decisions, spectral projections);
* :mod:`conelab.circle` - Fourier model of the circle, Hardy projections,
  and the transform intertwining multiplication and Toeplitz compression;
* :mod:`conelab.geometry` / :mod:`conelab.symbols` / :mod:`conelab.cone` -
  the cone model: grids, cutoffs, symbol algebra with matching condition,
  the transform into the quantization space, and the zero-order quantization;
* :mod:`conelab.index` - character pairing, winding oracles, diagnostics;
* :mod:`conelab.resolution` - resolutions of projections, roll-ups,
  bounded normalization, and equivalence testing;
* :mod:`conelab.cli` - the ``conelab`` batch runner.
"""

__version__ = "0.1.0"

from .circle import (
    CircleSymbol,
    CircleTruncation,
    TrigPolynomial,
    circle_pdo_quantize,
    guillemin_transform_circle,
    hardy_projections,
    multiplication_operator,
    szego_projection,
)
from .cone import (
    ConeModel,
    cone_action,
    cone_quantize,
    conormal_operator,
    pseudo_guillemin,
    toeplitz_projection,
    toeplitz_quantize,
    transported_circle_symbol,
)
from .geometry import ConeGeometry, CutoffSystem
from .index import (
    CharacterInput,
    IndexReport,
    chern_connes,
    cone_index_oracle,
    index_via_character,
    rational_winding,
    schatten_decay_profile,
    winding_number,
)
from .linalg import (
    LinearOperator,
    Projection,
    RankDecision,
    SpaceTag,
    fredholm_defect,
    hermitian_eig,
    identity,
    kernel_projection,
    positive_spectral_projection,
    range_projection,
    schatten_norm,
    space,
    spectral_function,
)
from .resolution import (
    BoundedResolution,
    RollUp,
    UnboundedResolution,
    bounded_normalization,
    dual_projection,
    equivalence_test,
    hardy_resolution,
    inverse_sqrt_quadrature,
    laplacians,
    reduction_unitary,
    roll_up,
    synth_resolution,
    unbounded_roll_up_check,
)
from .symbols import ConeSymbol, ConormalFamily, InteriorFunction, RationalFunction
