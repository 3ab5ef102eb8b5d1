"""Digitally delicate primes: searches, covering construction, analytic checks."""

from .arith import (
    crt_combine,
    factorize,
    is_prime,
    largest_prime_factor,
    multiplicative_order,
    omega,
    primality,
    segmented_sieve,
)
from .delicacy import is_digitally_delicate, is_widely_delicate, search_interval
from .digits import PerturbationBox, enumerate_box, single_digit_variants, to_digits

__version__ = "0.1.0"

__all__ = [
    "PerturbationBox",
    "crt_combine",
    "enumerate_box",
    "factorize",
    "is_digitally_delicate",
    "is_prime",
    "is_widely_delicate",
    "largest_prime_factor",
    "multiplicative_order",
    "omega",
    "primality",
    "search_interval",
    "segmented_sieve",
    "single_digit_variants",
    "to_digits",
]
