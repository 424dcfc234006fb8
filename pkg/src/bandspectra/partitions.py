"""Set partitions of {1..k}: enumeration, the refinement lattice, matchings.

Partitions are stored canonically (each part sorted, parts ordered by their
minimum), so equality and hashing are structural. Enumeration follows
restricted-growth-string order, which is deterministic and puts the
all-singletons partition last.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import CapacityError, DomainError

ENUMERATION_CAP = 10
AUDIT_CAP = 4
AUDIT_CAP_LARGE = 5


@dataclass(frozen=True)
class Partition:
    ground_size: int
    parts: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        seen = set()
        for part in self.parts:
            if not part:
                raise DomainError("empty part in partition")
            if list(part) != sorted(part):
                raise DomainError("parts must be sorted ascending")
            seen.update(part)
        if seen != set(range(1, self.ground_size + 1)):
            raise DomainError(
                f"parts must cover 1..{self.ground_size} exactly once"
            )
        if sum(len(p) for p in self.parts) != self.ground_size:
            raise DomainError("parts overlap")
        if list(self.parts) != sorted(self.parts, key=lambda p: p[0]):
            raise DomainError("parts must be ordered by minimum element")

    @staticmethod
    def from_parts(parts, ground_size: int | None = None) -> "Partition":
        """Build a partition from any iterable of iterables, canonicalizing."""
        canon = tuple(sorted((tuple(sorted(p)) for p in parts), key=lambda p: p[0]))
        if ground_size is None:
            ground_size = max((p[-1] for p in canon), default=0)
        return Partition(ground_size, canon)

    @staticmethod
    def singletons(k: int) -> "Partition":
        return Partition(k, tuple((i,) for i in range(1, k + 1)))

    @staticmethod
    def one_block(k: int) -> "Partition":
        return Partition(k, (tuple(range(1, k + 1)),))

    def __len__(self) -> int:
        return len(self.parts)

    def block_index(self) -> dict[int, int]:
        """Map each element to the index of its part."""
        idx = {}
        for b, part in enumerate(self.parts):
            for i in part:
                idx[i] = b
        return idx

    def __repr__(self):
        inner = "|".join(",".join(str(i) for i in p) for p in self.parts)
        return f"Partition({inner})"


def enumerate_partitions(k: int, *, cap: int = ENUMERATION_CAP) -> list[Partition]:
    """All partitions of {1..k} in restricted-growth-string order."""
    if k < 1:
        raise DomainError("k must be positive")
    if k > cap:
        raise CapacityError(f"k={k} exceeds enumeration cap {cap}")
    out = []
    rgs = [0] * k

    def rec(i, max_used):
        if i == k:
            blocks = [[] for _ in range(max_used + 1)]
            for pos, label in enumerate(rgs):
                blocks[label].append(pos + 1)
            out.append(Partition(k, tuple(tuple(b) for b in blocks)))
            return
        for label in range(max_used + 2):
            rgs[i] = label
            rec(i + 1, max(max_used, label))

    rec(1, 0)
    return out


def enumerate_no_singleton(k: int, *, cap: int = ENUMERATION_CAP) -> list[Partition]:
    """Partitions of {1..k} in which every part has at least two elements."""
    return [p for p in enumerate_partitions(k, cap=cap) if all(len(a) >= 2 for a in p.parts)]


def enumerate_perfect_matchings(k: int, *, cap: int = ENUMERATION_CAP) -> list[Partition]:
    """All perfect matchings of {1..k} (k even), deterministic order."""
    if k < 1:
        raise DomainError("k must be positive")
    if k > 2 * cap:
        raise CapacityError(f"k={k} exceeds matching enumeration cap {2 * cap}")
    if k % 2:
        return []
    out = []
    pairs = []

    def rec(free):
        if not free:
            out.append(Partition.from_parts(pairs, k))
            return
        a = free[0]
        for i in range(1, len(free)):
            b = free[i]
            pairs.append((a, b))
            rec(free[1:i] + free[i + 1:])
            pairs.pop()

    rec(tuple(range(1, k + 1)))
    return out


def is_perfect_matching(p: Partition) -> bool:
    return all(len(a) == 2 for a in p.parts)


def refines(fine: Partition, coarse: Partition) -> bool:
    """True iff every part of `fine` lies inside some part of `coarse`."""
    if fine.ground_size != coarse.ground_size:
        raise DomainError("partitions have different ground sets")
    idx = coarse.block_index()
    return all(all(idx[i] == idx[part[0]] for i in part) for part in fine.parts)


def join(a: Partition, b: Partition) -> Partition:
    """Least upper bound: connected components of the union of both part graphs."""
    if a.ground_size != b.ground_size:
        raise DomainError("partitions have different ground sets")
    k = a.ground_size
    parent = list(range(k + 1))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for p in (a, b):
        for part in p.parts:
            r = find(part[0])
            for i in part[1:]:
                parent[find(i)] = r
    blocks: dict[int, list[int]] = {}
    for i in range(1, k + 1):
        blocks.setdefault(find(i), []).append(i)
    return Partition.from_parts(blocks.values(), k)


def join_all(*parts: Partition) -> Partition:
    out = parts[0]
    for p in parts[1:]:
        out = join(out, p)
    return out


def standard_matchings(block_sizes) -> tuple[Partition, Partition]:
    """The two reference matchings of {1..2k} for blocks of sizes k_1..k_r.

    The first pairs consecutive elements (1,2),(3,4),...; the second chains
    within each block with a wrap pair closing the cycle, so their join has
    exactly r parts of sizes 2*k_1, ..., 2*k_r.
    """
    sizes = list(block_sizes)
    if not sizes:
        raise DomainError("block sizes must be non-empty")
    if any(s < 1 for s in sizes):
        raise DomainError("block sizes must be positive")
    k = sum(sizes)
    pi0 = Partition.from_parts(
        [(2 * i - 1, 2 * i) for i in range(1, k + 1)], 2 * k
    )
    parts = []
    offset = 0
    for size in sizes:
        parts.append((offset + 2 * size, offset + 1))
        for v in range(1, size):
            parts.append((offset + 2 * v, offset + 2 * v + 1))
        offset += 2 * size
    pi1 = Partition.from_parts(parts, 2 * k)
    return pi0, pi1


def mobius_weight(coarse: Partition, fine: Partition) -> int:
    """Product over coarse parts A of (-1)^(m_A - 1) (m_A - 1)! where m_A
    counts the fine parts inside A."""
    if not refines(fine, coarse):
        raise DomainError("second partition must refine the first")
    idx = coarse.block_index()
    counts = [0] * len(coarse.parts)
    for part in fine.parts:
        counts[idx[part[0]]] += 1
    w = 1
    for m in counts:
        w *= (-1) ** (m - 1) * math.factorial(m - 1)
    return w


@dataclass
class AuditReport:
    """Outcome of the exhaustive join-bound audit for one k."""

    k: int
    triples_checked: int = 0
    violations: list[tuple] = field(default_factory=list)
    max_slack: int = -1
    slack_by_r: dict[int, int] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return not self.violations


def audit_join_bounds(k: int, *, allow_large: bool = False) -> AuditReport:
    """Exhaustively verify the join-count bounds on partitions of {1..2k}.

    With the consecutive-pairs matching held fixed, iterate over every
    perfect matching M of {1..2k} and every no-singleton partition P whose
    triple join with the two matchings is connected, and check

        #(M0 v P) + #(M v P) <= 1 + #P <= k + 1

    and, whenever r = #(M0 v M) > 1, the sharper bound

        #(M0 v P) + #(M v P) <= k + 1 - floor(r / 2).

    Fixing one matching loses no generality (the bounds are invariant under
    relabeling) and cuts the search by a factor (2k-1)!!.
    """
    cap = AUDIT_CAP_LARGE if allow_large else AUDIT_CAP
    if k < 1:
        raise DomainError("k must be positive")
    if k > cap:
        raise CapacityError(f"k={k} exceeds audit cap {cap}")
    pi0 = standard_matchings([1] * k)[0]
    candidates = enumerate_no_singleton(2 * k)
    join0 = {p: join(pi0, p) for p in candidates}
    report = AuditReport(k=k)
    for pi1 in enumerate_perfect_matchings(2 * k):
        j01 = join(pi0, pi1)
        r = len(j01)
        for p in candidates:
            if len(join(j01, p)) != 1:
                continue
            lhs = len(join0[p]) + len(join(pi1, p))
            report.triples_checked += 1
            bound = k + 1 - r // 2 if r > 1 else k + 1
            slack = bound - lhs
            if lhs > 1 + len(p) or 1 + len(p) > k + 1 or slack < 0:
                report.violations.append((pi1, p, lhs, len(p), r))
            report.max_slack = max(report.max_slack, slack)
            if r > 1:
                report.slack_by_r[r] = max(report.slack_by_r.get(r, -1), slack)
    return report


def matching_only_bound_example() -> tuple[Partition, Partition, Partition]:
    """A triple showing the bound k + 2 - r, sharp for matchings, can fail
    when the third partition has parts of size three."""
    pi0 = Partition.from_parts(
        [(1, 2), (3, 4), (5, 6), (7, 8), (9, 10), (11, 12)], 12
    )
    pi1 = Partition.from_parts(
        [(2, 3), (1, 4), (5, 6), (7, 8), (9, 10), (11, 12)], 12
    )
    pi = Partition.from_parts(
        [(1, 5, 6), (2, 7, 8), (3, 9, 10), (4, 11, 12)], 12
    )
    return pi0, pi1, pi
