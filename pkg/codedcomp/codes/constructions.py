"""
codedcomp Code Constructions

Generator matrices for the coded-computation schemes: Reed-Muller codes and
their subcodes, polar codes designed for a binary erasure channel, random
binary codes and real-valued MDS baselines. Binary codes are stored in the
±1 form used for computation (0 -> -1, 1 -> +1).
"""

from dataclasses import dataclass, field
from enum import Enum
from math import comb
from typing import Any, Dict, List, Optional

import numpy as np
from loguru import logger

from ..errors import CapacityError, InputError, SamplingError
from ..linalg import has_full_row_rank
from ..utils.rng import keyed_rng


class CodeFamily(str, Enum):
    RM = "rm"
    POLAR = "polar"
    RANDOM_BINARY = "random"
    MDS_REAL = "mds"
    UNCODED = "uncoded"


@dataclass(eq=False)
class GeneratorMatrix:
    """A k x n generator with family metadata.

    Kronecker-derived families record the chosen rows of the 0/1 Kronecker
    matrix under meta["rows"] together with meta["m"].
    """

    family: CodeFamily
    entries: np.ndarray
    meta: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if self.entries.ndim != 2:
            raise InputError(f"generator must be 2-D, got shape {self.entries.shape}")
        self.entries.setflags(write=False)

    @property
    def k(self) -> int:
        return int(self.entries.shape[0])

    @property
    def n(self) -> int:
        return int(self.entries.shape[1])

    @property
    def is_binary(self) -> bool:
        return self.family is not CodeFamily.MDS_REAL

    @property
    def kronecker_rows(self) -> Optional[List[int]]:
        rows = self.meta.get("rows")
        return list(rows) if rows is not None else None

    def to_dict(self) -> Dict[str, Any]:
        return {
            "family": self.family.value,
            "n": self.n,
            "k": self.k,
            "meta": self.meta,
            "entries": self.entries.tolist(),
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "GeneratorMatrix":
        family = CodeFamily(data["family"])
        dtype = np.float64 if family is CodeFamily.MDS_REAL else np.int64
        return cls(family=family, entries=np.array(data["entries"], dtype=dtype), meta=dict(data.get("meta", {})))


@dataclass
class BitChannelProfile:
    """Erasure probabilities of the n synthetic bit channels for a BEC(eps)."""

    m: int
    eps: float
    z: np.ndarray
    order: str = "natural"

    def mean(self) -> float:
        return float(self.z.mean())


def _check_m(m: int, max_level: int) -> None:
    if m < 0:
        raise InputError(f"m must be non-negative, got {m}")
    if m > max_level:
        raise CapacityError(f"Kronecker level {m} exceeds the configured maximum {max_level}")


def kronecker_matrix(m: int, max_level: int = 13) -> np.ndarray:
    """m-fold Kronecker power of [[1, 0], [1, 1]] as a 0/1 int64 matrix.

    Row i has a one in column j exactly when the bits of j are a subset of the bits of i.
    """
    _check_m(m, max_level)
    base = np.array([[1, 0], [1, 1]], dtype=np.int64)
    G = np.ones((1, 1), dtype=np.int64)
    for _ in range(m):
        G = np.kron(G, base)
    return G


def _popcounts(n: int) -> np.ndarray:
    return np.array([bin(i).count("1") for i in range(n)], dtype=np.int64)


def _from_kronecker_rows(family: CodeFamily, m: int, rows: List[int], max_level: int, **meta) -> GeneratorMatrix:
    G = kronecker_matrix(m, max_level)
    rows = sorted(int(r) for r in rows)
    entries = 2 * G[rows, :] - 1
    return GeneratorMatrix(family=family, entries=entries, meta={"m": m, "rows": rows, **meta})


def rm_dimension(m: int, r: int) -> int:
    return sum(comb(m, w) for w in range(r + 1))


def rm_generator(m: int, r: int, max_level: int = 13) -> GeneratorMatrix:
    """RM(m, r): rows of the Kronecker matrix with weight at least 2^(m-r)."""
    if not 0 <= r <= m:
        raise InputError(f"RM order must satisfy 0 <= r <= m, got r={r}, m={m}")
    _check_m(m, max_level)
    weights = _popcounts(2**m)
    rows = [i for i in range(2**m) if weights[i] >= m - r]
    logger.debug(f"RM({m},{r}) with k={len(rows)}")
    return _from_kronecker_rows(CodeFamily.RM, m, rows, max_level, r=r)


def rm_subcode_generator(m: int, k: int, max_level: int = 13) -> GeneratorMatrix:
    """The k heaviest Kronecker rows, ties broken toward larger indices.

    For k equal to an RM dimension this is exactly that RM code.
    """
    n = 2**m
    if not 1 <= k <= n:
        raise InputError(f"subcode dimension must satisfy 1 <= k <= {n}, got {k}")
    _check_m(m, max_level)
    weights = _popcounts(n)
    order = sorted(range(n), key=lambda i: (-weights[i], -i))
    rows = order[:k]
    r = next((r for r in range(m + 1) if rm_dimension(m, r) == k), None)
    meta: Dict[str, Any] = {"subcode": r is None}
    if r is not None:
        meta["r"] = r
    return _from_kronecker_rows(CodeFamily.RM, m, rows, max_level, **meta)


def bec_bit_channels(m: int, eps: float, order: str = "natural") -> BitChannelProfile:
    """Bit-channel erasure probabilities via Z -> (2Z - Z^2, Z^2).

    In natural order the most significant index bit is the first split applied
    on the channel side; "bit-reversed" permutes the result.
    """
    if not 0.0 <= eps <= 1.0:
        raise InputError(f"erasure probability must lie in [0, 1], got {eps}")
    if m < 0:
        raise InputError(f"m must be non-negative, got {m}")
    z = bec_bit_channels_array(m, np.array([eps]))[0]
    if order == "bit-reversed":
        z = z[bit_reversal_permutation(m)]
    elif order != "natural":
        raise InputError(f"unknown bit-channel order: {order}")
    return BitChannelProfile(m=m, eps=float(eps), z=z, order=order)


def bec_bit_channels_array(m: int, eps: np.ndarray) -> np.ndarray:
    """Natural-order bit-channel profiles for a vector of erasure probabilities, shape (len(eps), 2^m)."""
    z = np.asarray(eps, dtype=np.float64).reshape(-1, 1)
    for _ in range(m):
        nz = np.empty((z.shape[0], 2 * z.shape[1]))
        nz[:, 0::2] = 2 * z - z * z
        nz[:, 1::2] = z * z
        z = nz
    return z


def bit_reversal_permutation(m: int) -> np.ndarray:
    return np.array([int(format(i, f"0{m}b")[::-1], 2) if m else 0 for i in range(2**m)], dtype=np.int64)


def polar_info_set(m: int, k: int, eps_design: float) -> List[int]:
    """Indices of the k most reliable bit channels, ascending; ties go to the smaller index."""
    n = 2**m
    if not 1 <= k <= n:
        raise InputError(f"k must satisfy 1 <= k <= {n}, got {k}")
    if not 0.0 < eps_design < 1.0:
        raise InputError(f"design erasure probability must lie in (0, 1), got {eps_design}")
    z = bec_bit_channels(m, eps_design).z
    chosen = np.lexsort((np.arange(n), z))[:k]
    return sorted(int(i) for i in chosen)


def polar_generator(m: int, k: int, eps_design: float, max_level: int = 13) -> GeneratorMatrix:
    _check_m(m, max_level)
    rows = polar_info_set(m, k, eps_design)
    return _from_kronecker_rows(CodeFamily.POLAR, m, rows, max_level, eps_design=float(eps_design))


def random_binary_generator(
    n: int, k: int, seed: int, budget: int = 1000, certify: bool = True
) -> GeneratorMatrix:
    """Uniform ±1 matrix conditioned on full row rank over the rationals."""
    if not 1 <= k <= n:
        raise InputError(f"need 1 <= k <= n, got k={k}, n={n}")
    rng = keyed_rng(seed, "random-binary", n, k)
    for attempt in range(1, budget + 1):
        entries = rng.choice(np.array([-1, 1], dtype=np.int64), size=(k, n))
        if has_full_row_rank(entries, certify=certify):
            if attempt > 1:
                logger.debug(f"random binary ({n},{k}) accepted after {attempt} draws")
            return GeneratorMatrix(
                family=CodeFamily.RANDOM_BINARY, entries=entries, meta={"seed": seed, "attempts": attempt}
            )
    raise SamplingError(f"no full-rank ({k}x{n}) ±1 matrix found in {budget} draws")


def mds_real_generator(n: int, k: int, kind: str = "vandermonde", seed: Optional[int] = None) -> GeneratorMatrix:
    """Real MDS generator: Vandermonde on Chebyshev nodes or i.i.d. Gaussian."""
    if not 1 <= k <= n:
        raise InputError(f"need 1 <= k <= n, got k={k}, n={n}")
    if kind == "vandermonde":
        nodes = np.cos((2 * np.arange(n) + 1) * np.pi / (2 * n))
        entries = np.vander(nodes, k, increasing=True).T.copy()
    elif kind == "gaussian":
        entries = keyed_rng(seed or 0, "gaussian-mds", n, k).standard_normal((k, n))
    else:
        raise InputError(f"unknown MDS kind: {kind}")
    return GeneratorMatrix(family=CodeFamily.MDS_REAL, entries=entries, meta={"kind": kind, "seed": seed})


def uncoded_generator(n: int) -> GeneratorMatrix:
    """Identity code: worker i computes block i."""
    if n < 1:
        raise InputError("n must be positive")
    entries = np.eye(n, dtype=np.int64)
    return GeneratorMatrix(family=CodeFamily.UNCODED, entries=entries, meta={})
