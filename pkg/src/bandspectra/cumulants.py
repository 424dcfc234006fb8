"""Moments and joint cumulants linked through the partition lattice.

Both functionals are subset-indexed: joint moments and cumulants are
symmetric in their arguments, so a value per non-empty subset of {1..k} is
the whole story and permutation invariance holds by construction.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Callable

import numpy as np

from .errors import CapacityError, DomainError, InsufficientDataError
from .partitions import Partition, enumerate_partitions, mobius_weight

LATTICE_ARITY_CAP = 10


@dataclass(frozen=True)
class MomentFunctional:
    """E of the product over each non-empty subset of {1..k}."""

    arity: int
    evaluator: Callable[[frozenset], float]

    def __call__(self, subset) -> float:
        s = frozenset(subset)
        if not s or not s <= set(range(1, self.arity + 1)):
            raise DomainError(f"subset {set(subset)} not within 1..{self.arity}")
        return self.evaluator(s)

    @staticmethod
    def from_table(arity: int, table: dict) -> "MomentFunctional":
        frozen = {frozenset(k): float(v) for k, v in table.items()}
        return MomentFunctional(arity, frozen.__getitem__)


@dataclass(frozen=True)
class CumulantFunctional:
    """Joint cumulant over each non-empty subset of {1..k}."""

    arity: int
    evaluator: Callable[[frozenset], float]

    def __call__(self, subset) -> float:
        s = frozenset(subset)
        if not s or not s <= set(range(1, self.arity + 1)):
            raise DomainError(f"subset {set(subset)} not within 1..{self.arity}")
        return self.evaluator(s)

    @staticmethod
    def from_table(arity: int, table: dict) -> "CumulantFunctional":
        frozen = {frozenset(k): float(v) for k, v in table.items()}
        return CumulantFunctional(arity, frozen.__getitem__)


def _check_arity(pi: Partition, functional) -> None:
    if pi.ground_size != functional.arity:
        raise DomainError(
            f"partition of {pi.ground_size} elements vs functional arity {functional.arity}"
        )


def moment_product(pi: Partition, m: MomentFunctional) -> float:
    """Product over parts A of m(A)."""
    _check_arity(pi, m)
    out = 1.0
    for a in pi.parts:
        out *= m(a)
    return out


def cumulant_product(pi: Partition, c: CumulantFunctional) -> float:
    """Product over parts A of c(A)."""
    _check_arity(pi, c)
    out = 1.0
    for a in pi.parts:
        out *= c(a)
    return out


def refinements(pi: Partition) -> list[Partition]:
    """All partitions refining pi, as products of per-part partitions."""
    if pi.ground_size > LATTICE_ARITY_CAP:
        raise CapacityError(
            f"arity {pi.ground_size} exceeds lattice cap {LATTICE_ARITY_CAP}"
        )
    per_part = []
    for a in pi.parts:
        local = enumerate_partitions(len(a))
        relabeled = []
        for q in local:
            relabeled.append([[a[i - 1] for i in block] for block in q.parts])
        per_part.append(relabeled)
    out = []
    for combo in product(*per_part):
        blocks = [tuple(b) for group in combo for b in group]
        out.append(Partition.from_parts(blocks, pi.ground_size))
    return out


def moments_from_cumulants(c: CumulantFunctional, pi: Partition) -> float:
    """Sum of cumulant products over all partitions refining pi.

    With pi the one-block partition this is the plain moment of the full
    product.
    """
    _check_arity(pi, c)
    return float(sum(cumulant_product(sigma, c) for sigma in refinements(pi)))


def cumulant_from_moments(m: MomentFunctional, pi: Partition) -> float:
    """Signed-weight sum of moment products over refinements of pi.

    Inverts moments_from_cumulants (Moebius inversion on the partition
    lattice).
    """
    _check_arity(pi, m)
    return float(
        sum(
            mobius_weight(pi, sigma) * moment_product(sigma, m)
            for sigma in refinements(pi)
        )
    )


def moment_functional_from_cumulants(c: CumulantFunctional) -> MomentFunctional:
    """The moment functional whose cumulants are exactly c."""

    def ev(subset: frozenset) -> float:
        elems = tuple(sorted(subset))
        relabel = {i + 1: e for i, e in enumerate(elems)}
        total = 0.0
        for q in enumerate_partitions(len(elems)):
            prod_val = 1.0
            for block in q.parts:
                prod_val *= c(frozenset(relabel[i] for i in block))
            total += prod_val
        return total

    return MomentFunctional(c.arity, ev)


def cumulant_functional_from_moments(m: MomentFunctional) -> CumulantFunctional:
    """The cumulant functional of the moment functional m."""

    def ev(subset: frozenset) -> float:
        elems = tuple(sorted(subset))
        relabel = {i + 1: e for i, e in enumerate(elems)}
        total = 0.0
        one = Partition.one_block(len(elems))
        for q in enumerate_partitions(len(elems)):
            prod_val = 1.0
            for block in q.parts:
                prod_val *= m(frozenset(relabel[i] for i in block))
            total += mobius_weight(one, q) * prod_val
        return total

    return CumulantFunctional(m.arity, ev)


def empirical_joint_cumulant(samples: np.ndarray, indices: tuple) -> float:
    """Plug-in joint cumulant of the named columns of a samples matrix.

    Orders 1..3 are supported. Order 2 applies the unbiased m/(m-1)
    covariance correction; orders 1 and 3 are plain plug-in.
    """
    samples = np.asarray(samples, dtype=np.float64)
    if samples.ndim != 2:
        raise DomainError("samples must be a 2-d array (rows are observations)")
    m_count = samples.shape[0]
    if m_count < 2:
        raise InsufficientDataError("need at least 2 samples")
    order = len(indices)
    if order < 1 or order > 3:
        raise CapacityError(f"order {order} not supported (max 3)")
    for i in indices:
        if not 1 <= i <= samples.shape[1]:
            raise DomainError(f"column index {i} outside 1..{samples.shape[1]}")
    cols = [samples[:, i - 1] for i in indices]
    if order == 1:
        return float(np.mean(cols[0]))
    if order == 2:
        raw = float(np.mean(cols[0] * cols[1])) - float(np.mean(cols[0])) * float(
            np.mean(cols[1])
        )
        return raw * m_count / (m_count - 1)

    def mom(subset: frozenset) -> float:
        prod_val = np.ones(m_count)
        for i in subset:
            prod_val = prod_val * cols[i - 1]
        return float(np.mean(prod_val))

    m_fn = MomentFunctional(order, mom)
    return cumulant_from_moments(m_fn, Partition.one_block(order))


def linear_process_cumulant(model, offsets) -> float:
    """Exact joint cumulant of the convolved process at the given offsets.

    For offsets (j_0, ..., j_r) this is

        kappa_{r+1}(W) * sum_l h(j_0 + l) ... h(j_r + l),

    an exact finite sum thanks to the finite kernel support. Symmetric in
    the offsets and invariant under a common shift.
    """
    offs = tuple(int(j) for j in offsets)
    if not offs:
        raise DomainError("need at least one offset")
    kappa = model.driver.cumulant(len(offs))
    if kappa == 0.0:
        return 0.0
    support = model.kernel.support
    lo = support[0] - max(offs)
    hi = support[-1] - min(offs)
    total = 0.0
    h = model.kernel.coefficient
    for ell in range(lo, hi + 1):
        prod_val = 1.0
        for j in offs:
            prod_val *= h(j + ell)
            if prod_val == 0.0:
                break
        total += prod_val
    return kappa * total
