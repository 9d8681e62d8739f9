"""
codedcomp Polar SC Decoder

Successive-cancellation erasure decoding over the reals for generators built
from rows of the Kronecker matrix (polar codes, and RM codes as a special
case).

A ±1 codeword y = x (2 G_B - J) is itself a real codeword u' G_n whose
non-zero inputs sit on B plus the last index n - 1, so SC runs directly on y
with every other input frozen to zero.
"""

from itertools import product
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
from loguru import logger

from ..codes.channel import ErasurePattern
from ..codes.constructions import BitChannelProfile, GeneratorMatrix, bec_bit_channels_array
from ..errors import InputError
from .base import DecodeReport, ErasureDecoder

_Node = Tuple[Optional[np.ndarray], np.ndarray, Optional[np.ndarray], np.ndarray]


def _bc(mask: np.ndarray, values: np.ndarray) -> np.ndarray:
    return mask.reshape(mask.shape + (1,) * (values.ndim - 1))


def _sc(values: Optional[np.ndarray], known: np.ndarray, frozen: np.ndarray) -> _Node:
    """Decode one segment; returns (u values, u known, re-encoded x values, x known).

    With `values` None only erasure flags are propagated.
    """
    size = known.shape[0]
    if size == 1:
        if frozen[0]:
            zero = None if values is None else np.zeros_like(values)
            flag = np.ones(1, dtype=bool)
            return zero, flag, zero, flag
        return values, known, values, known

    h = size // 2
    k1, k2 = known[:h], known[h:]
    v1 = v2 = None
    if values is not None:
        v1, v2 = values[:h], values[h:]

    # check node: the first half input sees c1 - c2
    dk = k1 & k2
    dv = None if values is None else np.where(_bc(dk, v1), v1 - v2, 0.0)
    u1v, u1k, x1v, x1k = _sc(dv, dk, frozen[:h])

    # variable node: the second half is read directly or through c1 - x1
    alt = k1 & x1k
    gk = k2 | alt
    gv = None
    if values is not None:
        gv = np.where(_bc(k2, v2), v2, np.where(_bc(alt, v1), v1 - x1v, 0.0))
    u2v, u2k, x2v, x2k = _sc(gv, gk, frozen[h:])

    uk = np.concatenate([u1k, u2k])
    xk = np.concatenate([x1k & x2k, x2k])
    if values is None:
        return None, uk, None, xk
    return np.concatenate([u1v, u2v]), uk, np.concatenate([x1v + x2v, x2v]), xk


def _kronecker_encode(u: np.ndarray) -> np.ndarray:
    """u G_n for the 0/1 Kronecker matrix, over the reals."""
    x = np.array(u, dtype=np.float64, copy=True)
    n = x.shape[0]
    step = n // 2
    while step >= 1:
        for start in range(0, n, 2 * step):
            x[start : start + step] += x[start + step : start + 2 * step]
        step //= 2
    return x


def _frozen_mask(m: int, rows: Sequence[int]) -> np.ndarray:
    n = 2**m
    frozen = np.ones(n, dtype=bool)
    frozen[list(rows)] = False
    frozen[n - 1] = False
    return frozen


def _layout(generator: GeneratorMatrix) -> Tuple[int, List[int], np.ndarray]:
    rows = generator.kronecker_rows
    if rows is None or "m" not in generator.meta:
        raise InputError("SC decoding needs a generator built from Kronecker rows")
    m = int(generator.meta["m"])
    return m, rows, _frozen_mask(m, rows)


def sc_erase_decode(generator: GeneratorMatrix, y: Optional[np.ndarray], pattern: ErasurePattern) -> DecodeReport:
    """Run SC on the received word; succeeds iff every information input is resolved."""
    m, rows, frozen = _layout(generator)
    n = 2**m
    if pattern.n != n:
        raise InputError(f"pattern length {pattern.n} does not match code length {n}")
    known = ~pattern.mask
    vals = None
    if y is not None:
        y = np.asarray(y, dtype=np.float64)
        vals = np.where(_bc(known, y), y, 0.0)

    u_vals, u_known, _, _ = _sc(vals, known, frozen)
    unresolved = [i for i in rows if not u_known[i]]
    if unresolved:
        return DecodeReport(
            success=False,
            recovered=(),
            values=None,
            iterations=1,
            decoder="sc",
            diagnostics=[f"information inputs {unresolved} remained erased"],
        )
    if not pattern.erased or u_vals is None:
        return DecodeReport(True, pattern.erased, None, 1, "sc")

    u = u_vals.copy()
    if n - 1 not in rows and not u_known[n - 1]:
        # the last input equals minus the sum of the message
        u[n - 1] = -0.5 * u[rows].sum(axis=0)
    codeword = _kronecker_encode(u)
    erased = list(pattern.erased)
    return DecodeReport(True, tuple(erased), codeword[erased], 1, "sc")


def sc_failure_prob(profile: Union[BitChannelProfile, np.ndarray], info_set: Sequence[int]) -> float:
    """1 - prod(1 - Z_i) over the information set.

    Bit-channel erasures are positively correlated, so this upper-bounds the
    true SC block failure probability.
    """
    z = profile.z if isinstance(profile, BitChannelProfile) else np.asarray(profile, dtype=np.float64)
    with np.errstate(divide="ignore"):
        logs = np.log1p(-np.clip(z[list(info_set)], 0.0, 1.0))
    return float(-np.expm1(logs.sum()))


def sc_failure_curve(m: int, info_set: Sequence[int], eps: np.ndarray) -> np.ndarray:
    """Product-formula failure probability for each erasure probability in `eps`."""
    eps = np.atleast_1d(np.asarray(eps, dtype=np.float64))
    z = bec_bit_channels_array(m, eps)[:, list(info_set)]
    with np.errstate(divide="ignore"):
        logs = np.log1p(-np.clip(z, 0.0, 1.0))
    return np.clip(-np.expm1(logs.sum(axis=1)), 0.0, 1.0)


def sc_failure_prob_exact(m: int, info_set: Sequence[int], eps: float) -> float:
    """Exact SC block failure probability by weighting all 2^n patterns (m <= 4)."""
    if m > 4:
        raise InputError("exact SC failure enumeration is limited to m <= 4")
    n = 2**m
    rows = sorted(int(i) for i in info_set)
    frozen = _frozen_mask(m, rows)
    total = 0.0
    for bits in product((False, True), repeat=n):
        mask = np.array(bits)
        _, u_known, _, _ = _sc(None, ~mask, frozen)
        if not u_known[rows].all():
            e = int(mask.sum())
            total += eps**e * (1 - eps) ** (n - e)
    return total


class ScDecoder(ErasureDecoder):
    name = "sc"

    def __init__(self, generator: GeneratorMatrix):
        super().__init__(generator)
        _layout(generator)

    def decodable(self, erased: Sequence[int]) -> bool:
        return sc_erase_decode(self.generator, None, ErasurePattern(self.generator.n, tuple(erased))).success

    def recover(self, y: np.ndarray, pattern: ErasurePattern) -> DecodeReport:
        y = self._check_received(y, pattern)
        report = sc_erase_decode(self.generator, y, pattern)
        if not report.success:
            logger.debug(f"SC failed on {pattern.size} erasures")
        return report
