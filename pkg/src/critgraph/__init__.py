"""Critical configuration-model random graphs: depth-first exploration
walks, Poissonized discovery fields, limit processes and their excursions."""

from .degree_model import (
    DegreeLaw,
    Regime,
    calibrate_power_law,
    laplace,
    phi,
    psi,
    sample_degrees,
    validate,
)
from .ensemble import (EnsembleConfig, EnsembleSummary, conjecture_probe, defect_arrival_report, ks_distance,
                       run_ensemble)
from .excursions import ExcursionList, excursions, l2_distance, reflect
from .explorer import ExplorationResult, component_index, components_from_walk, explore, rescale_walk, sample_simple
from .limit_process import (
    LevySpec,
    drift_powerlaw,
    moment_oracles,
    simulate_brownian_parabolic,
    simulate_powerlaw_limit,
)
from .paths import LimitPath, PathKind
from .poisson_field import PoissonFieldSample, drift_A, simulate_field, variation_QV, walk_S

__version__ = "0.1.0"
