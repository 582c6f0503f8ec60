"""Group accuracy, optimal delegation and delegation games for weighted liquid democracy."""

from .accuracy import AccuracyReport, group_accuracy, group_accuracy_mc, profile_accuracy
from .errors import (
    AllUninformative,
    DomainError,
    InstanceTooLarge,
    InvalidInstance,
    NoGurus,
    PerfectAgent,
    ResourceGuard,
    SupportTooLarge,
    TooManyGurus,
)
from .games import (
    best_response_dynamics,
    construct_max_accuracy_NE,
    gd_utilities,
    is_U_NE,
    price_of_anarchy,
    price_of_anarchy_pure,
)
from .model import AccuracyProfile, Network, WeightedProfile, expected_weights, resolve_gurus
from .optimal import algorithm1, best_pure_accuracy, optimal_weights
from .shares import apportionment, is_Uhat_NE, stationary_weights, utility_hat

__version__ = "0.1.0"

__all__ = [
    "AccuracyProfile",
    "AccuracyReport",
    "AllUninformative",
    "DomainError",
    "InstanceTooLarge",
    "InvalidInstance",
    "Network",
    "NoGurus",
    "PerfectAgent",
    "ResourceGuard",
    "SupportTooLarge",
    "TooManyGurus",
    "WeightedProfile",
    "algorithm1",
    "apportionment",
    "best_pure_accuracy",
    "best_response_dynamics",
    "construct_max_accuracy_NE",
    "expected_weights",
    "gd_utilities",
    "group_accuracy",
    "group_accuracy_mc",
    "is_U_NE",
    "is_Uhat_NE",
    "optimal_weights",
    "price_of_anarchy",
    "price_of_anarchy_pure",
    "profile_accuracy",
    "resolve_gurus",
    "stationary_weights",
    "utility_hat",
]
