"""Multi-threaded generation of ABCD benchmark graphs with planted communities."""

__version__ = "0.1.0"

from .assignment import MixingConfig, Membership, Variant
from .engine import BenchmarkGraph, GenParams, generate_benchmark, generate_parallel
from .generator import GraphKernel, SimpleGraph
from .sampling import CommunitySizes, DegreeSequence, PowerLawSpec

__all__ = [
    "BenchmarkGraph", "CommunitySizes", "DegreeSequence", "GenParams", "GraphKernel",
    "Membership", "MixingConfig", "PowerLawSpec", "SimpleGraph", "Variant",
    "generate_benchmark", "generate_parallel",
]
