"""
codedcomp Decoder Base

Common interface for erasure decoders: a cheap decodability test used by
the analytics and the simulator, and value recovery used for end-to-end
computation.
"""

from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from ..codes.channel import ErasurePattern
from ..codes.constructions import GeneratorMatrix
from ..errors import InputError


@dataclass
class DecodeReport:
    """Outcome of one decode.

    `values[i]` is the recovered codeword entry for coordinate `recovered[i]`;
    payload dimensions trail the first axis.
    """

    success: bool
    recovered: Tuple[int, ...]
    values: Optional[np.ndarray]
    iterations: int
    decoder: str
    diagnostics: List[str] = field(default_factory=list)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "success": self.success,
            "recovered": list(self.recovered),
            "iterations": self.iterations,
            "decoder": self.decoder,
            "diagnostics": list(self.diagnostics),
        }


class ErasureDecoder(ABC):
    """Decoder bound to one generator matrix."""

    name: str = "decoder"

    def __init__(self, generator: GeneratorMatrix):
        self.generator = generator

    @abstractmethod
    def decodable(self, erased: Sequence[int]) -> bool:
        """Whether every erased coordinate can be recovered."""

    @abstractmethod
    def recover(self, y: np.ndarray, pattern: ErasurePattern) -> DecodeReport:
        """Recover erased coordinates of the received word y (erased entries are ignored)."""

    def _check_received(self, y: np.ndarray, pattern: ErasurePattern) -> np.ndarray:
        y = np.asarray(y, dtype=np.float64)
        if y.ndim < 1 or y.shape[0] != self.generator.n:
            raise InputError(f"received word has {y.shape[0] if y.ndim else 0} entries, expected {self.generator.n}")
        if pattern.n != self.generator.n:
            raise InputError(f"pattern length {pattern.n} does not match code length {self.generator.n}")
        return y

    def complete(self, y: np.ndarray, pattern: ErasurePattern) -> np.ndarray:
        """Full codeword with erased entries filled in; raises InputError when decoding fails."""
        report = self.recover(y, pattern)
        if not report.success:
            raise InputError(f"{self.name} decoder failed on {pattern.size} erasures")
        full = np.array(y, dtype=np.float64, copy=True)
        if report.recovered:
            full[list(report.recovered)] = report.values
        return full

    def first_decodable_prefix(self, order: Sequence[int]) -> Optional[int]:
        """Smallest j >= k such that the first j arrivals in `order` are decodable."""
        n = self.generator.n
        for j in range(self.generator.k, n + 1):
            if self.decodable(sorted(order[j:])):
                return j
        return None
