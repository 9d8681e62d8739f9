"""
codedcomp: Coded Distributed Computing over Erasure Channels

Binary and real erasure codes for straggler-tolerant distributed
computation: Reed-Muller, polar, random binary and MDS constructions, MAP,
projective and successive-cancellation erasure decoders, execution-time
analytics and a straggler simulator.
"""

__version__ = "0.1.0"
__description__ = "Coded distributed computing over erasure channels"

from .codes.channel import ErasurePattern
from .codes.constructions import CodeFamily, GeneratorMatrix
from .config import CodedCompConfig, ExperimentConfig
from .errors import CodedCompError
from .orchestrator import ExperimentOrchestrator

__all__ = [
    "CodeFamily",
    "CodedCompConfig",
    "CodedCompError",
    "ErasurePattern",
    "ExperimentConfig",
    "ExperimentOrchestrator",
    "GeneratorMatrix",
]
