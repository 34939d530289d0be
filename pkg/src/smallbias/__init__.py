"""Deterministic small-biased sets over Z_n and the quantum automata built from them."""

from .group_spectral import CosineLedger, CyclicGroup, SpectralProfile, build_profile
from .derandomizer import (
    DescentError,
    EstimatorState,
    InfeasibleError,
    ParameterSet,
    choose_d,
    find_set,
    sigma_check,
)
from .qfa_mod import ModQfa
from .qfa_palindrome import PalindromeQfa, PromiseViolation, PromiseWord, validate_promise

__all__ = [
    "CosineLedger",
    "CyclicGroup",
    "DescentError",
    "EstimatorState",
    "InfeasibleError",
    "ModQfa",
    "PalindromeQfa",
    "ParameterSet",
    "PromiseViolation",
    "PromiseWord",
    "SpectralProfile",
    "build_profile",
    "choose_d",
    "find_set",
    "sigma_check",
    "validate_promise",
]
