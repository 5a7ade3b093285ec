"""Learning precise linear models from imprecise and fuzzy data by generalized
loss minimization, with data disambiguation and a GMLI baseline."""

from .dataset import Example, pack, read_jsonl, write_jsonl
from .disambiguate import (
    brute_force_instantiation_risk,
    disambiguate,
    gradual_selection,
    joint_brute_force,
)
from .fuzzy_sets import (
    CrispLabel,
    FuzzyLabel,
    Interval,
    Precise,
    Trapezoid,
    alpha_cut,
    membership,
    support,
)
from .gmli import GmliConfig, gmli_interval_loss, gmli_logistic_loss, normalized_gmli_interval_loss
from .losses import (
    LossSpec,
    base_loss,
    closed_form_fuzzy_l1,
    fuzzy_label_loss,
    fuzzy_loss,
    fuzzy_margin_loss,
    margin_loss,
    set_loss,
    set_loss_xy,
    shifted_margin_loss,
)
from .models import LinearModel
from .optimize import FitResult, OptimizerConfig, fit, gradient_check
from .risk import (
    Dominance,
    RiskConfig,
    RiskFunction,
    aggregated_risk,
    dominates,
    empirical_risk,
    generalized_empirical_risk,
    pareto_front,
    risk_function,
)

__version__ = "0.1.0"
