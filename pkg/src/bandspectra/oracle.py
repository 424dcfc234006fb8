"""Exact finite-size joint cumulants of traces of banded Gram powers.

The expansion of C(trace Y^{k_1}, ..., trace Y^{k_r}) runs over no-singleton
partitions P of the 2k expanded index slots (k = k_1 + ... + k_r) whose join
with the two standard matchings is connected:

    sum_P  n^(-k + #(M0 v P))  *  sum_words  mask(word) * C_P(word)

Words assign a column index in {1..p} to each slot, constant on the parts of
the chaining matching M1, so there is one free value per part and the word
sum has exactly p^k terms. mask(word) is the band indicator over the k
consecutive slot pairs, and C_P(word) is the product over parts of P of the
exact process cumulant at the assigned offsets.

This is a desk-scale tool: defaults cap the total power at 3 and the matrix
size at 8, which keeps a full evaluation in the low milliseconds.
"""

from __future__ import annotations

import warnings
from itertools import product

from .errors import CapacityError, ConfigurationError, DomainError
from .cumulants import linear_process_cumulant
from .partitions import enumerate_no_singleton, join, standard_matchings
from .process import ProcessModel

TOTAL_POWER_CAP = 3
TOTAL_POWER_CAP_LARGE = 5
DIMENSION_CAP = 8
DIMENSION_CAP_LARGE = 32


def _check_caps(k: int, p: int, allow_large: bool) -> None:
    k_cap = TOTAL_POWER_CAP_LARGE if allow_large else TOTAL_POWER_CAP
    p_cap = DIMENSION_CAP_LARGE if allow_large else DIMENSION_CAP
    if k > k_cap:
        raise CapacityError(f"total power {k} exceeds cap {k_cap}")
    if p > p_cap:
        raise CapacityError(f"dimension {p} exceeds cap {p_cap}")
    if allow_large and (k > TOTAL_POWER_CAP or p > DIMENSION_CAP):
        warnings.warn(
            f"exact evaluation at k={k}, p={p} costs about p^k * |partitions| "
            "cumulant products; expect it to be slow",
            stacklevel=3,
        )


def exact_trace_cumulant(
    model: ProcessModel,
    block_sizes,
    p: int,
    n: int,
    b: int,
    *,
    allow_large: bool = False,
    ignore_mask: bool = False,
) -> float:
    """Joint cumulant of (trace Y^{k_1}, ..., trace Y^{k_r}) at finite size.

    `ignore_mask` evaluates the same expansion with the band indicator
    removed; with b >= p - 1 the masked value must agree with it.
    """
    sizes = [int(s) for s in block_sizes]
    if not sizes or any(s < 1 for s in sizes):
        raise DomainError("block sizes must be positive")
    if p < 1 or n < 1 or b < 0:
        raise DomainError("need p >= 1, n >= 1, b >= 0")
    k = sum(sizes)
    _check_caps(k, p, allow_large)
    if 2 * k > model.driver.max_order:
        raise ConfigurationError(
            f"driver supplies cumulants to order {model.driver.max_order}, "
            f"need order {2 * k}"
        )

    pi0, pi1 = standard_matchings(sizes)
    # one free column index per part of the chaining matching
    free_parts = pi1.parts
    slot_owner = [0] * (2 * k + 1)
    for part_idx, part in enumerate(free_parts):
        for slot in part:
            slot_owner[slot] = part_idx
    mask_pairs = [(2 * a - 1, 2 * a) for a in range(1, k + 1)]

    cum_cache: dict[tuple, float] = {}

    def process_cumulant(offsets: tuple) -> float:
        key = tuple(sorted(o - min(offsets) for o in offsets))
        try:
            return cum_cache[key]
        except KeyError:
            value = linear_process_cumulant(model, key)
            cum_cache[key] = value
            return value

    total = 0.0
    join01 = join(pi0, pi1)
    for pi in enumerate_no_singleton(2 * k):
        if len(join(join01, pi)) != 1:
            continue
        weight = float(n) ** (-k + len(join(pi0, pi)))
        part_slots = [tuple(a) for a in pi.parts]
        word_sum = 0.0
        for values in product(range(1, p + 1), repeat=len(free_parts)):
            word = [0] * (2 * k + 1)
            for slot in range(1, 2 * k + 1):
                word[slot] = values[slot_owner[slot]]
            if not ignore_mask:
                if any(abs(word[s] - word[t]) > b for s, t in mask_pairs):
                    continue
            term = 1.0
            for slots in part_slots:
                term *= process_cumulant(tuple(word[s] for s in slots))
                if term == 0.0:
                    break
            word_sum += term
        total += weight * word_sum
    return total


def exact_mean_trace(
    model: ProcessModel, k: int, p: int, n: int, b: int, *, allow_large: bool = False
) -> float:
    """Exact E trace Y^k: the single-block case of the cumulant formula."""
    return exact_trace_cumulant(model, (k,), p, n, b, allow_large=allow_large)
