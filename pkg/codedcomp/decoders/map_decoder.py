"""
codedcomp MAP Decoder

Block-MAP and bit-MAP erasure decoding. For binary generators all rank and
span questions are answered over the rationals; real-valued MDS generators
use a pivoted-QR rank with a relative tolerance.
"""

from typing import List, Optional, Sequence

import numpy as np
from loguru import logger

from ..codes.channel import ErasurePattern
from ..codes.constructions import GeneratorMatrix
from ..errors import InputError
from ..linalg import (
    SECOND_MODULUS,
    SpanSolver,
    SpanTracker,
    exact_inverse,
    has_full_row_rank,
    independent_columns,
    numeric_rank,
    rank_exact,
    rank_mod_p,
)
from .base import DecodeReport, ErasureDecoder


def _payload_dot(weights: np.ndarray, values: np.ndarray) -> np.ndarray:
    return np.tensordot(weights, values, axes=(1, 0))


def block_map_decodable(
    G: GeneratorMatrix, pattern: ErasurePattern, certify: bool = True, tol: float = 1e-10
) -> bool:
    """Whether the unerased columns of G have full row rank k."""
    unerased = list(pattern.unerased)
    if len(unerased) < G.k:
        return False
    sub = G.entries[:, unerased]
    if G.is_binary:
        return has_full_row_rank(sub, certify=certify)
    return numeric_rank(sub, tol)[0] == G.k


def bit_map_recover(
    G: GeneratorMatrix, y: np.ndarray, pattern: ErasurePattern, tol: float = 1e-10
) -> DecodeReport:
    """Recover every erased coordinate whose generator column lies in the span of the unerased ones."""
    y = np.asarray(y, dtype=np.float64)
    unerased = list(pattern.unerased)
    recovered: List[int] = []
    weights: List[np.ndarray] = []

    if unerased and G.is_binary:
        solver = SpanSolver(G.entries[:, unerased])
        for e in pattern.erased:
            w = solver.solve(G.entries[:, e])
            if w is not None:
                recovered.append(e)
                weights.append(np.array([float(x) for x in w]))
    elif unerased:
        sub = G.entries[:, unerased].astype(np.float64)
        base_rank = numeric_rank(sub, tol)[0]
        for e in pattern.erased:
            target = G.entries[:, e].astype(np.float64)
            if numeric_rank(np.column_stack([sub, target]), tol)[0] > base_rank:
                continue
            w, *_ = np.linalg.lstsq(sub, target, rcond=None)
            recovered.append(e)
            weights.append(w)

    values = None
    if recovered:
        values = _payload_dot(np.vstack(weights), y[unerased])
    success = len(recovered) == pattern.size
    return DecodeReport(
        success=success,
        recovered=tuple(recovered),
        values=values,
        iterations=1,
        decoder="bit-map",
        diagnostics=[] if success else [f"{pattern.size - len(recovered)} coordinates outside the unerased span"],
    )


def recover_message(
    G: GeneratorMatrix, y: np.ndarray, pattern: ErasurePattern, exact: bool = False, tol: float = 1e-10
) -> np.ndarray:
    """Message x (k rows, payload trailing) with x @ G equal to y on the unerased coordinates.

    With `exact` set and an integer-valued payload the solve is carried out in
    rational arithmetic before the final conversion to float.
    """
    y = np.asarray(y, dtype=np.float64)
    unerased = np.array(pattern.unerased, dtype=np.int64)
    if unerased.size < G.k:
        raise InputError("not enough unerased coordinates to recover the message")
    sub = G.entries[:, unerased]
    if G.is_binary:
        cols = independent_columns(sub)
    else:
        rank, cols = numeric_rank(sub, tol)
        cols = cols if rank == G.k else []
    if len(cols) < G.k:
        raise InputError("erasure pattern is not block-decodable")
    chosen = unerased[cols]
    y_chosen = y[chosen]

    if not G.is_binary:
        flat = y_chosen.reshape(G.k, -1)
        x = np.linalg.solve(G.entries[:, chosen].T, flat)
        return x.reshape(y_chosen.shape)

    inverse = exact_inverse(G.entries[:, chosen].T)
    if exact and np.array_equal(y_chosen, np.round(y_chosen)):
        inv_obj = np.array(inverse, dtype=object)
        y_obj = np.vectorize(int, otypes=[object])(y_chosen.reshape(G.k, -1))
        x_obj = inv_obj.dot(y_obj)
        return np.vectorize(float, otypes=[np.float64])(x_obj).reshape(y_chosen.shape)
    inv_float = np.array([[float(v) for v in row] for row in inverse])
    return _payload_dot(inv_float, y_chosen)


class MapDecoder(ErasureDecoder):
    """Optimal erasure decoder: block-MAP when the pattern allows it, bit-MAP otherwise."""

    name = "map"

    def __init__(self, generator: GeneratorMatrix, certify: bool = True, tol: float = 1e-10):
        super().__init__(generator)
        self.certify = certify
        self.tol = tol

    def decodable(self, erased: Sequence[int]) -> bool:
        return block_map_decodable(self.generator, ErasurePattern(self.generator.n, tuple(erased)), self.certify, self.tol)

    def recover(self, y: np.ndarray, pattern: ErasurePattern) -> DecodeReport:
        y = self._check_received(y, pattern)
        if not pattern.erased:
            return DecodeReport(True, (), None, 1, self.name)
        if block_map_decodable(self.generator, pattern, self.certify, self.tol):
            x = recover_message(self.generator, y, pattern, tol=self.tol)
            erased = list(pattern.erased)
            values = np.tensordot(self.generator.entries[:, erased].T.astype(np.float64), x, axes=(1, 0))
            return DecodeReport(True, tuple(erased), values, 1, self.name)
        report = bit_map_recover(self.generator, y, pattern, self.tol)
        report.decoder = self.name
        logger.debug(f"block-MAP failed; bit-MAP recovered {len(report.recovered)}/{pattern.size}")
        return report

    def first_decodable_prefix(self, order: Sequence[int]) -> Optional[int]:
        if not self.generator.is_binary:
            return super().first_decodable_prefix(order)
        G = self.generator.entries
        k = self.generator.k
        tracker = SpanTracker(k)
        j: Optional[int] = None
        for count, col in enumerate(order, start=1):
            tracker.add(G[:, col])
            if tracker.rank == k:
                j = count
                break
        if j is None:
            # modular rank can undercount; settle the full word exactly
            if self.certify and rank_exact(G[:, list(order)]) == k:
                return super().first_decodable_prefix(order)
            return None
        # shorter prefixes passed the modular screen as deficient; confirm
        while j - 1 >= k and self._prefix_full_rank(G[:, list(order[: j - 1])]):
            j -= 1
        return j

    def _prefix_full_rank(self, sub: np.ndarray) -> bool:
        if self.certify:
            return rank_exact(sub) == self.generator.k
        return rank_mod_p(sub, SECOND_MODULUS) == self.generator.k

