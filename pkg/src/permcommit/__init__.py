"""Simulation of a quantum bit commitment scheme whose secret key is a fixed-point-free involution."""

__version__ = "0.1.0"

from .hilbert import PureState, RegisterLayout, measure_analysis, measure_sample
from .perm import Perm, enumerate_keys, is_key
from .protocol import alice_commit, alice_open, bob_verify, run_honest
from .states import big_phi, phi, rho

__all__ = [
    "Perm",
    "PureState",
    "RegisterLayout",
    "alice_commit",
    "alice_open",
    "big_phi",
    "bob_verify",
    "enumerate_keys",
    "is_key",
    "measure_analysis",
    "measure_sample",
    "phi",
    "rho",
    "run_honest",
]
