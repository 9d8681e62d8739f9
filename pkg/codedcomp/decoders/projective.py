"""
codedcomp Projective Decoder

Recursive-projection erasure decoding for Reed-Muller codes in ±1 form.

A projection plan picks r-1 of the m unit basis vectors. Its subspace S
partitions the n coordinates into cosets; summing each coset with signs
gamma_z = (-1)^(s - |z & S|) and dividing by 2 turns RM(m, r) into a code
whose column dependencies are those of RM(m - r + 1, 1). That small code is
decoded with exact MAP, and recovered coset values are pushed back to the
single missing coordinate of their coset. Plans are applied one after
another so a later plan already sees what earlier plans filled in.
"""

from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from loguru import logger

from ..codes.channel import ErasurePattern
from ..codes.constructions import CodeFamily, GeneratorMatrix, rm_generator
from ..errors import ConstructionError, InputError
from ..linalg import SpanSolver, independent_rows
from .base import DecodeReport, ErasureDecoder

DEFAULT_N_MAX: Dict[Tuple[int, int], int] = {(3, 2): 1, (4, 2): 2, (5, 3): 2, (6, 3): 3}
FALLBACK_N_MAX = 3


def default_n_max(m: int, r: int) -> int:
    return DEFAULT_N_MAX.get((m, r), FALLBACK_N_MAX)


def _submasks(mask: int) -> List[int]:
    out = []
    b = mask
    while True:
        out.append(b)
        if b == 0:
            break
        b = (b - 1) & mask
    return sorted(out)


@dataclass(frozen=True, eq=False)
class ProjectionPlan:
    """One choice of basis vectors and the projected code it induces.

    `basis` holds 1-based positions j of the unit vectors e_j, where e_j is
    the index bit 2^(m-j). `members[c]` lists the coordinates of coset c in
    ascending order; cosets are ordered by their smallest member.
    """

    m: int
    r: int
    basis: Tuple[int, ...]
    mask: int
    members: np.ndarray
    coset_of: np.ndarray
    gamma: np.ndarray
    normalizer: int
    projected: np.ndarray
    reduced: np.ndarray

    @property
    def num_cosets(self) -> int:
        return int(self.members.shape[0])

    @property
    def rank(self) -> int:
        return int(self.reduced.shape[0])

    @property
    def cosets(self) -> List[Tuple[int, ...]]:
        return [tuple(int(z) for z in row) for row in self.members]


@dataclass
class ProjectedWord:
    """Coset values of one plan; a coset is unknown while any member is unknown."""

    plan: ProjectionPlan
    values: Optional[np.ndarray]
    known: np.ndarray


def _plan_geometry(m: int, r: int, basis: Sequence[int]) -> Tuple[int, np.ndarray, np.ndarray, np.ndarray, int]:
    n = 2**m
    s = r - 1
    mask = 0
    for j in basis:
        mask |= 1 << (m - j)
    reps = [a for a in range(n) if a & mask == 0]
    subs = _submasks(mask)
    members = np.array([[a | b for b in subs] for a in reps], dtype=np.int64)
    coset_of = np.empty(n, dtype=np.int64)
    for c, row in enumerate(members):
        coset_of[row] = c
    parity = (s - np.array([bin(z & mask).count("1") for z in range(n)])) % 2
    gamma = np.where(parity == 0, 1, -1).astype(np.int64)
    return mask, members, coset_of, gamma, (2 if s else 1)


def build_projection_plan(
    m: int, r: int, generator: Optional[GeneratorMatrix] = None
) -> List[ProjectionPlan]:
    """All C(m, r-1) plans in lexicographic order of their basis positions."""
    if not 1 <= r <= m:
        raise InputError(f"projection needs 1 <= r <= m, got r={r}, m={m}")
    G = generator if generator is not None else rm_generator(m, r)
    n = 2**m
    if G.n != n:
        raise InputError(f"generator length {G.n} does not match 2^{m}")
    expected_rank = m - r + 2
    plans = []
    for basis in combinations(range(1, m + 1), r - 1):
        mask, members, coset_of, gamma, normalizer = _plan_geometry(m, r, basis)
        combine = np.zeros((n, members.shape[0]), dtype=np.int64)
        combine[np.arange(n), coset_of] = gamma
        raw = G.entries @ combine
        if np.any(raw % normalizer):
            raise ConstructionError(f"projection {basis} does not divide by {normalizer}")
        projected = raw // normalizer
        rows = independent_rows(projected)
        if len(rows) != expected_rank:
            raise ConstructionError(
                f"projection {basis} of RM({m},{r}) has rank {len(rows)}, expected {expected_rank}"
            )
        plans.append(
            ProjectionPlan(
                m=m,
                r=r,
                basis=tuple(basis),
                mask=mask,
                members=members,
                coset_of=coset_of,
                gamma=gamma,
                normalizer=normalizer,
                projected=projected,
                reduced=projected[rows],
            )
        )
    logger.debug(f"built {len(plans)} projection plans for RM({m},{r})")
    return plans


def plan_to_dict(plan: ProjectionPlan) -> Dict[str, Any]:
    return {
        "m": plan.m,
        "r": plan.r,
        "basis": list(plan.basis),
        "projected": plan.projected.tolist(),
        "reduced": plan.reduced.tolist(),
    }


def plan_from_dict(data: Dict[str, Any]) -> ProjectionPlan:
    """Rebuild a plan from its stored matrices; coset geometry is recomputed."""
    m, r, basis = int(data["m"]), int(data["r"]), tuple(int(j) for j in data["basis"])
    mask, members, coset_of, gamma, normalizer = _plan_geometry(m, r, basis)
    projected = np.array(data["projected"], dtype=np.int64)
    reduced = np.array(data["reduced"], dtype=np.int64)
    if projected.shape[1] != members.shape[0] or reduced.shape[0] != m - r + 2:
        raise ConstructionError(f"stored projection plan {basis} for RM({m},{r}) has the wrong shape")
    return ProjectionPlan(m, r, basis, mask, members, coset_of, gamma, normalizer, projected, reduced)


def project(y: Optional[np.ndarray], known: np.ndarray, plan: ProjectionPlan) -> ProjectedWord:
    """Signed coset sums of y divided by the plan normalizer."""
    coset_known = known[plan.members].all(axis=1)
    if y is None:
        return ProjectedWord(plan, None, coset_known)
    signs = plan.gamma[plan.members].astype(np.float64)
    member_vals = np.where(_expand(known, y)[plan.members], y[plan.members], 0.0)
    values = np.einsum("cs,cs...->c...", signs, member_vals) / plan.normalizer
    return ProjectedWord(plan, values, coset_known)


def _expand(mask: np.ndarray, values: np.ndarray) -> np.ndarray:
    return mask.reshape(mask.shape + (1,) * (values.ndim - 1))


@dataclass
class _LeafSolution:
    recoverable: Dict[int, Tuple[np.ndarray, np.ndarray]]
    checks: List[Tuple[int, np.ndarray, np.ndarray]]


def _solve_leaf(plan: ProjectionPlan, unknown_bits: int) -> _LeafSolution:
    cols = plan.num_cosets
    unknown = [c for c in range(cols) if unknown_bits >> c & 1]
    known = [c for c in range(cols) if not unknown_bits >> c & 1]
    recoverable: Dict[int, Tuple[np.ndarray, np.ndarray]] = {}
    checks: List[Tuple[int, np.ndarray, np.ndarray]] = []
    if not known:
        return _LeafSolution(recoverable, checks)
    solver = SpanSolver(plan.reduced[:, known])
    pivots = [known[i] for i in solver.columns]
    for c in unknown:
        w = solver.solve(plan.reduced[:, c])
        if w is not None:
            recoverable[c] = (np.array(pivots, dtype=np.int64), np.array([float(w[i]) for i in solver.columns]))
    for idx, c in enumerate(known):
        if idx in solver.columns:
            continue
        w = solver.solve(plan.reduced[:, c])
        checks.append((c, np.array(pivots, dtype=np.int64), np.array([float(w[i]) for i in solver.columns])))
    return _LeafSolution(recoverable, checks)


def decode_leaf(
    pw: ProjectedWord, rtol: float = 1e-6, solver_cache=None
) -> Tuple[ProjectedWord, List[str]]:
    """Exact MAP on the projected code: fill every unknown coset in the span of the known ones."""
    plan = pw.plan
    unknown_bits = sum(1 << int(c) for c in np.flatnonzero(~pw.known))
    solve = solver_cache or _solve_leaf
    solution = solve(plan, unknown_bits)
    known = pw.known.copy()
    notes: List[str] = []
    values = None if pw.values is None else pw.values.copy()
    for c, (support, weights) in solution.recoverable.items():
        known[c] = True
        if values is not None:
            values[c] = np.tensordot(weights, values[support], axes=(0, 0))
    if values is not None:
        for c, support, weights in solution.checks:
            predicted = np.tensordot(weights, pw.values[support], axes=(0, 0))
            scale = max(1.0, float(np.max(np.abs(pw.values[c]))))
            if float(np.max(np.abs(predicted - pw.values[c]))) > rtol * scale:
                notes.append(f"inconsistent projected value at coset {c} of plan {plan.basis}")
    return ProjectedWord(plan, values, known), notes


def aggregate(
    y: Optional[np.ndarray], known: np.ndarray, pw: ProjectedWord
) -> List[int]:
    """Fill the single unknown member of every coset whose projected value is known.

    Mutates `y` and `known` in place and returns the coordinates filled.
    """
    plan = pw.plan
    member_known = known[plan.members]
    missing = (~member_known).sum(axis=1)
    filled = []
    for c in np.flatnonzero((missing == 1) & pw.known):
        row = plan.members[c]
        z = int(row[~member_known[c]][0])
        if y is not None:
            others = row[member_known[c]]
            partial = np.tensordot(plan.gamma[others].astype(np.float64), y[others], axes=(0, 0))
            y[z] = plan.gamma[z] * (plan.normalizer * pw.values[c] - partial)
        known[z] = True
        filled.append(z)
    return filled


class ProjectiveDecoder(ErasureDecoder):
    """Iterative projection decoder for RM(m, r) with r >= 1."""

    name = "projective"

    def __init__(
        self,
        generator: GeneratorMatrix,
        n_max: Optional[int] = None,
        rtol: float = 1e-6,
        trace: bool = False,
        plans: Optional[List[ProjectionPlan]] = None,
    ):
        super().__init__(generator)
        if generator.family is not CodeFamily.RM or generator.meta.get("subcode") or "r" not in generator.meta:
            raise InputError("projective decoding needs a full Reed-Muller generator")
        self.m = int(generator.meta["m"])
        self.r = int(generator.meta["r"])
        if self.r < 1:
            raise InputError("projective decoding needs RM order r >= 1")
        self.n_max = n_max if n_max is not None else default_n_max(self.m, self.r)
        if self.n_max < 1:
            raise InputError("n_max must be at least 1")
        self.rtol = rtol
        self.trace = trace
        if plans is not None and any(p.m != self.m or p.r != self.r for p in plans):
            raise InputError(f"supplied plans do not belong to RM({self.m},{self.r})")
        self.plans = plans if plans is not None else build_projection_plan(self.m, self.r, generator)
        self._init_caches()

    def _init_caches(self) -> None:
        self._leaf = lru_cache(maxsize=65536)(_solve_leaf)
        self._decodable = lru_cache(maxsize=65536)(self._decodable_uncached)

    def __getstate__(self):
        # lru_cache wrappers do not pickle; worker processes rebuild them
        state = self.__dict__.copy()
        state.pop("_leaf", None)
        state.pop("_decodable", None)
        return state

    def __setstate__(self, state):
        self.__dict__.update(state)
        self._init_caches()

    def decodable(self, erased: Sequence[int]) -> bool:
        return self._decodable(tuple(erased))

    def _decodable_uncached(self, erased: Tuple[int, ...]) -> bool:
        return self._run(None, ErasurePattern(self.generator.n, erased)).success

    def recover(self, y: np.ndarray, pattern: ErasurePattern) -> DecodeReport:
        y = self._check_received(y, pattern)
        return self._run(y, pattern)

    def _run(self, y: Optional[np.ndarray], pattern: ErasurePattern) -> DecodeReport:
        known = ~pattern.mask
        vals = None
        if y is not None:
            vals = np.where(_expand(known, y), y, 0.0)
        notes: List[str] = []
        iterations = 0
        while iterations < self.n_max and not known.all():
            iterations += 1
            progress = False
            for plan in self.plans:
                if known.all():
                    break
                pw = project(vals, known, plan)
                if pw.known.all():
                    continue
                decoded, leaf_notes = decode_leaf(pw, self.rtol, self._leaf)
                notes.extend(leaf_notes)
                filled = aggregate(vals, known, decoded)
                if self.trace:
                    notes.append(
                        f"iter={iterations} plan={list(plan.basis)} "
                        f"unknown_cosets={np.flatnonzero(~pw.known).tolist()} "
                        f"leaf_recovered={np.flatnonzero(decoded.known & ~pw.known).tolist()} "
                        f"filled={sorted(filled)}"
                    )
                progress = progress or bool(filled)
            if not progress:
                break
        recovered = tuple(e for e in pattern.erased if known[e])
        values = None
        if vals is not None and recovered:
            values = vals[list(recovered)]
        for note in notes:
            if note.startswith("inconsistent"):
                logger.warning(note)
        return DecodeReport(
            success=bool(known.all()),
            recovered=recovered,
            values=values,
            iterations=max(iterations, 1),
            decoder=self.name,
            diagnostics=notes,
        )


def decode(
    G_rm: GeneratorMatrix, y: np.ndarray, pattern: ErasurePattern, n_max: Optional[int] = None
) -> DecodeReport:
    """One-shot projective decode of y."""
    return ProjectiveDecoder(G_rm, n_max).recover(y, pattern)
