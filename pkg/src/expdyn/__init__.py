"""Numerics for the dynamics of exponential polynomials.

Functions of the form f(z) = sum_j Q_j(z) exp(b_j z^d + P_j(z)) are
evaluated in overflow-safe log domain, their orbits classified with
escape certificates, the sets where no single term dominates measured,
large annuli tiled into injectivity-scale squares with certified image
density bounds, and the results rendered and aggregated from the command
line (`expdyn --help`).
"""

from .errors import (
    BadBase,
    BadSigma,
    DegenerateQ,
    DomainError,
    EvalOverflow,
    ExpDynError,
    NotApplicable,
    ZeroValue,
)
from .exceptional import (
    ExceptionalParams,
    PairPoly,
    c1_constant,
    dist_to_E1_lower,
    dist_to_E1_measured,
    e2_measure,
    in_E,
    in_E_mask,
    pair_poly,
    r0_bound,
)
from .funcs import (
    ExpPoly,
    ExpPolyTerm,
    HypothesisReport,
    LogComplex,
    approx_error,
    bundled_function,
    check_extra_condition,
    check_hypotheses,
    dominant_index,
    eval_deriv_log,
    eval_direct,
    eval_log,
    eval_log_batch,
    function_from_dict,
    function_to_dict,
    load_function,
)
from .grid import (
    DensityReport,
    SquareTile,
    Tiling,
    annulus_tail_bound,
    band_measure_bound,
    build_tiling,
    default_sigma,
    distortion_constant_C2,
    filter_good_squares,
    good_square_near,
    is_good_square,
    koebe_distortion_factor,
    nested_measure_bound,
    square_density_bound,
)
from .measure import (
    AnnulusReport,
    CounterexampleParams,
    annulus_area,
    annulus_scan,
    b_measure_closed_form,
    b_measure_quadrature,
    b_wedge_halfwidth,
    b_wedge_increment,
    counterexample_check,
    headline_summary,
)
from .orbits import (
    ESCAPE_CERTIFIED,
    NON_ESCAPE_OBSERVED,
    UNDETERMINED,
    ClassifyParams,
    OrbitClass,
    classify_batch,
    classify_orbit,
    iterate_E_alpha,
    iterate_max_modulus,
    log_max_modulus,
    sixsmith_quantity,
)
from .poly import Poly
from .raster import (
    ImageBuffer,
    Viewport,
    read_ppm,
    render_classification,
    render_exceptional,
    write_ppm,
)
from .towers import TowerMag, tower_compare, tower_exp, tower_log, tower_pow

__version__ = "0.1.0"
