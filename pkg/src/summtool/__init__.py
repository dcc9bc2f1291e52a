"""Monomial summability toolkit.

Truncated bivariate series arithmetic, monomial decomposition and Gevrey
order estimation, Borel-Laplace summation along rays, compatibility decisions
between summability levels, and analysis of Pfaffian systems with normal
crossings.  Ships as a core package wrapped by a FastAPI service
(:mod:`summtool.service`) with the ``summtool`` CLI as a thin client.
"""

__version__ = "0.1.0"

from .borel import (
    LaplaceResult,
    MonomialSumPoint,
    PadeApproximant,
    SectorSpec,
    UnivariateSeries,
    estimate_singular_directions,
    formal_borel,
    laplace_sum,
    pade_continue,
    sum_in_monomial,
    summation_sector,
)
from .errors import DomainError, SingularDirectionError, SingularLinearPartError
from .gevrey import (
    GevreyEstimate,
    MonomialDecomposition,
    SummabilityLevel,
    canonical_level,
    cross_monomial_order,
    gevrey_certificate,
    gevrey_estimate,
    monomial_decompose,
    monomial_recompose,
)
from .pfaffian import (
    PfaffianSystem,
    RankReducedPair,
    SpectralDiagnosis,
    YPolynomial,
    classify_spectra,
    cross_check_other_side,
    formal_solve,
    integrability_residual,
    linear_integrability_residual,
    linear_parts,
    pullback_system,
    rank_reduce,
)
from .series import (
    BivariateSeries,
    BlowupMap,
    MonomialIndex,
    bracket,
    build_series,
    evaluate_truncated,
    partial_derivative,
    pullback_blowup,
    series_mul,
)
from .tauberian import (
    CompatibilityVerdict,
    NormalizationTranscript,
    WitnessSpec,
    classify_pair,
    levels_compatible,
    make_witness,
    normalize_by_blowups,
    probe_sum,
)
from .values import RationalComplex
