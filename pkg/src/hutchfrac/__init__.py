"""Iterated function systems on point clouds: attractors, contraction verdicts, remetrization."""

from .errors import (
    ConfigError, DimensionError, DomainEscape, HutchfracError, NoContraction,
    RemetrizationError, WordBudgetExceeded,
)
from .spaces import (
    Affine, Builtin, Clamp1D, DomainBox, IfsSystem, WordComposite, analytic_lipschitz,
    compose_word, enumerate_words, eval_word,
)
from .metrics import (
    Cloud, Coordinate, Euclidean, HausdorffLift, MaxOf, Multimetric, SupNorm, WeightedMax,
    check_axioms, diameter, directed_max, hausdorff,
)
from .oscillation import (
    ClassifyConfig, ContractivityReport, OscillationProfile, classify, iterate_profile,
    oscillation_analytic, oscillation_empirical, system_power_oscillation,
)
from .hutchinson import (
    ConvergenceTrace, SymbolStream, attractor_by_words, attractor_deterministic, chaos_game,
    coding_map, hutchinson_step,
)
from .remetrize import (
    build_banach_power, build_remetrized, rhat_eval, verify_banach_under,
    verify_edelstein_under, verify_krasnoselskii_under,
)
from .corpus import load_example, run_oracles

__version__ = "0.1.0"
