"""The q-digest quantile summary and its compression algorithms.

A q-digest stores a distribution of integer values in [1, sigma] as
positive counts attached to nodes of the binary partition tree of the
domain.  A compression parameter k controls how aggressively low-count
nodes are merged into their parents; a digest is considered well formed
when every non-leaf bucket keeps its count at or below floor(n / k)
(property 1) and every non-root bucket b has
b.cnt + b.parent.cnt + b.sibling.cnt above floor(n / k) (property 2).

The classic single bottom-up compression pass can leave property 2
violated after two digests are summed, because a merge at an upper level
can empty a parent whose count an earlier check relied upon.  This module
keeps that pass available as `compress_one_pass` and provides two
repaired algorithms, `recursive_compress` and `iterative_compress`, that
always restore property 2.
"""

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping

from .tree import (
    check_sigma,
    is_power_of_two,
    level,
    next_power_of_two,
    node_range,
    post_order_rank,
    sibling,
)

FrequencySet = Mapping[int, int]


def as_frequency_map(freqs: FrequencySet | Iterable[tuple[int, int]], sigma: int) -> dict[int, int]:
    """Normalize frequencies to a value -> multiplicity dict, validating the domain."""
    if not isinstance(sigma, int) or sigma < 1:
        raise ValueError(f"domain size must be a positive integer, got {sigma!r}")
    items = freqs.items() if isinstance(freqs, Mapping) else freqs
    out: dict[int, int] = {}
    for value, mult in items:
        if not isinstance(value, int) or not 1 <= value <= sigma:
            raise ValueError(f"value {value!r} out of domain [1, {sigma}]")
        if not isinstance(mult, int) or mult < 1:
            raise ValueError(f"multiplicity for value {value} must be a positive integer")
        out[value] = out.get(value, 0) + mult
    return out


class QDigest:
    """Immutable sparse map from tree node index to positive count.

    `leaf_width` is 1 for ordinary digests; coarse-grained digests built
    over a reduced tree carry the width of the original value range each
    leaf aggregates, and query answers are scaled back by it.
    """

    __slots__ = ("sigma", "k", "leaf_width", "_counts", "_n")

    def __init__(self, sigma: int, k: int, counts: Mapping[int, int] | None = None, leaf_width: int = 1):
        check_sigma(sigma)
        if not isinstance(k, int) or k < 1:
            raise ValueError(f"compression parameter k must be a positive integer, got {k!r}")
        if not is_power_of_two(leaf_width):
            raise ValueError(f"leaf width must be a positive power of two, got {leaf_width!r}")
        self.sigma = sigma
        self.k = k
        self.leaf_width = leaf_width
        top = 2 * sigma - 1
        items: dict[int, int] = {}
        if counts:
            for i in sorted(counts):
                c = counts[i]
                if not isinstance(i, int) or not 1 <= i <= top:
                    raise ValueError(f"node index {i!r} out of range [1, {top}]")
                if not isinstance(c, int) or c < 1:
                    raise ValueError(f"count for node {i} must be a positive integer, got {c!r}")
                items[i] = c
        self._counts = items
        self._n = sum(items.values())

    @property
    def n(self) -> int:
        """Total number of stored values."""
        return self._n

    @property
    def size(self) -> int:
        """Number of buckets (nodes with positive count)."""
        return len(self._counts)

    @property
    def domain_size(self) -> int:
        """Size of the original value domain (sigma * leaf_width)."""
        return self.sigma * self.leaf_width

    @property
    def threshold(self) -> int:
        """The compression bound floor(n / k)."""
        return self._n // self.k

    def count(self, i: int) -> int:
        return self._counts.get(i, 0)

    def buckets(self) -> dict[int, int]:
        """Copy of the index -> count map, in ascending index order."""
        return dict(self._counts)

    def post_order_buckets(self) -> list[tuple[int, int]]:
        """Buckets as (index, count) pairs sorted by post-order rank."""
        order = sorted(self._counts, key=lambda i: post_order_rank(i, self.sigma))
        return [(i, self._counts[i]) for i in order]

    def __eq__(self, other) -> bool:
        if not isinstance(other, QDigest):
            return NotImplemented
        return (
            self.sigma == other.sigma
            and self.k == other.k
            and self.leaf_width == other.leaf_width
            and self._counts == other._counts
        )

    def __repr__(self) -> str:
        return (
            f"QDigest(sigma={self.sigma}, k={self.k}, n={self._n}, "
            f"size={self.size}, leaf_width={self.leaf_width})"
        )


@dataclass(frozen=True)
class ValidityReport:
    """Outcome of checking one digest against every stated property."""

    prop1_violations: tuple[int, ...]
    prop2_violations: tuple[int, ...]
    size: int
    size_bound_ok: bool
    construction_invariant_holds: bool

    @property
    def ok(self) -> bool:
        """True when both defining properties hold."""
        return not self.prop1_violations and not self.prop2_violations


def nabla(q: QDigest, b: int) -> int:
    """Bottom-up neighborhood sum: own + parent + sibling counts (root: own only)."""
    if b == 1:
        return q.count(1)
    return q.count(b) + q.count(b // 2) + q.count(sibling(b))


def validate(q: QDigest) -> ValidityReport:
    """Check both count properties, the size bounds, and the construction invariant.

    Property 1 is required of every non-leaf bucket including the root;
    property 2 of every non-root bucket including leaves.  Reports, never
    raises.
    """
    thr = q.threshold
    prop1 = []
    prop2 = []
    has_bucket_child = False
    for b, cnt in q._counts.items():
        if b < q.sigma:
            if cnt > thr:
                prop1.append(b)
            if q.count(2 * b) or q.count(2 * b + 1):
                has_bucket_child = True
        if b != 1 and nabla(q, b) <= thr:
            prop2.append(b)
    return ValidityReport(
        prop1_violations=tuple(prop1),
        prop2_violations=tuple(prop2),
        size=q.size,
        size_bound_ok=q.size <= 4 * q.k + 1,
        construction_invariant_holds=not has_bucket_child,
    )


def _check_compatible(q1: QDigest, q2: QDigest) -> None:
    if (q1.sigma, q1.k, q1.leaf_width) != (q2.sigma, q2.k, q2.leaf_width):
        raise ValueError(
            "incompatible digests: "
            f"(sigma={q1.sigma}, k={q1.k}, leaf_width={q1.leaf_width}) vs "
            f"(sigma={q2.sigma}, k={q2.k}, leaf_width={q2.leaf_width})"
        )


def digest_sum(q1: QDigest, q2: QDigest) -> QDigest:
    """Pointwise count sum.  Preserves property 1 but may violate property 2."""
    _check_compatible(q1, q2)
    counts = dict(q1._counts)
    for i, c in q2._counts.items():
        counts[i] = counts.get(i, 0) + c
    return QDigest(q1.sigma, q1.k, counts, q1.leaf_width)


def _one_pass(counts: dict[int, int], threshold: int, sigma: int) -> bool:
    """One bottom-up sweep merging children into parents in place.

    Families are visited deepest level first, ascending index within a
    level.  Returns True when at least one merge moved positive mass; a
    "merge" of two empty children changes nothing and does not count.
    """
    merged = False
    for lvl in range(level(sigma), 0, -1):
        lo, hi = 1 << lvl, (2 << lvl) - 1
        parents = sorted({i // 2 for i in counts if lo <= i <= hi})
        for p in parents:
            l, r = 2 * p, 2 * p + 1
            lc = counts.get(l, 0)
            rc = counts.get(r, 0)
            if lc == 0 and rc == 0:
                continue
            if counts.get(p, 0) + lc + rc <= threshold:
                counts[p] = counts.get(p, 0) + lc + rc
                counts.pop(l, None)
                counts.pop(r, None)
                merged = True
    return merged


def compress_one_pass(q: QDigest) -> QDigest:
    """The original single-sweep compression; may leave property 2 violated."""
    counts = dict(q._counts)
    _one_pass(counts, q.threshold, q.sigma)
    return QDigest(q.sigma, q.k, counts, q.leaf_width)


def iterative_compress(q: QDigest) -> QDigest:
    """Repeat the single-sweep compression until a pass performs no merge."""
    counts = dict(q._counts)
    thr = q.threshold
    while _one_pass(counts, thr, q.sigma):
        pass
    return QDigest(q.sigma, q.k, counts, q.leaf_width)


def compress_iterations(q: QDigest) -> int:
    """Number of sweeps `iterative_compress` runs, final no-op pass included."""
    counts = dict(q._counts)
    thr = q.threshold
    passes = 1
    while _one_pass(counts, thr, q.sigma):
        passes += 1
    return passes


def recursive_compress(q: QDigest) -> QDigest:
    """Compress by recursing into subtrees, re-compressing after each merge.

    Whenever a node absorbs its children, both child subtrees are
    compressed again, so a merge can never invalidate a property check
    made at the level below.  Subtrees holding no mass are skipped; the
    skipped work consists only of merges of empty children, which have no
    effect.
    """
    counts = dict(q._counts)
    thr = q.threshold
    sigma = q.sigma
    below: dict[int, int] = {}
    for i, c in counts.items():
        j = i // 2
        while j >= 1:
            below[j] = below.get(j, 0) + c
            j //= 2

    def rec(b: int) -> None:
        if b >= sigma or below.get(b, 0) == 0:
            return
        l, r = 2 * b, 2 * b + 1
        rec(l)
        rec(r)
        lc = counts.get(l, 0)
        rc = counts.get(r, 0)
        if (lc or rc) and counts.get(b, 0) + lc + rc <= thr:
            counts[b] = counts.get(b, 0) + lc + rc
            counts.pop(l, None)
            counts.pop(r, None)
            below[b] -= lc + rc
            rec(l)
            rec(r)

    rec(1)
    return QDigest(sigma, q.k, counts, q.leaf_width)


def merge(q1: QDigest, q2: QDigest) -> QDigest:
    """Sum two digests and restore property 2, yielding a well-formed digest."""
    return iterative_compress(digest_sum(q1, q2))


def _build(freqs, k: int, sigma: int, leaf_width: int) -> QDigest:
    fmap = as_frequency_map(freqs, sigma)
    tree_sigma = next_power_of_two(sigma)
    counts = {tree_sigma + v - 1: m for v, m in fmap.items()}
    return iterative_compress(QDigest(tree_sigma, k, counts, leaf_width))


def build_from_frequencies(freqs: FrequencySet | Iterable[tuple[int, int]], k: int, sigma: int) -> QDigest:
    """Build a digest from a value -> multiplicity map.

    A non-power-of-two domain size is padded upward to the next power of
    two (the extra values simply stay at frequency zero), keeping the
    tree's node arithmetic closed-form.  The result satisfies both
    properties and the construction invariant: no bucket has a bucket
    child, which tightens the size bound to 2k+1.
    """
    return _build(freqs, k, sigma, 1)


def coarsen(
    freqs: FrequencySet | Iterable[tuple[int, int]],
    k: int,
    sigma: int,
    levels_cut: int,
) -> QDigest:
    """Build a coarse-grained digest by stopping the binary partition early.

    The bottom `levels_cut` tree levels are folded away: values are mapped
    onto a domain of sigma / 2**levels_cut leaves, each covering
    2**levels_cut original values.  Answers are scaled back up at query
    time, so disclosed precision is bounded below by the leaf width.
    """
    if not isinstance(levels_cut, int) or levels_cut < 0:
        raise ValueError(f"levels to cut must be a nonnegative integer, got {levels_cut!r}")
    if levels_cut == 0:
        return build_from_frequencies(freqs, k, sigma)
    fmap = as_frequency_map(freqs, sigma)
    tree_sigma = next_power_of_two(sigma)
    width = 1 << levels_cut
    if width > tree_sigma:
        raise ValueError(f"cannot cut {levels_cut} levels from a domain of size {tree_sigma}")
    coarse: dict[int, int] = {}
    for v, m in fmap.items():
        cv = (v + width - 1) // width
        coarse[cv] = coarse.get(cv, 0) + m
    return _build(coarse, k, tree_sigma // width, width)


def recompress(q: QDigest, k_new: int) -> QDigest:
    """Re-target a digest at a strictly smaller compression parameter.

    Lowering k raises floor(n / k), so property 1 is preserved and
    property 2 is restored by compression.  Raising k is refused: there
    is no procedure that restores property 1.
    """
    if not isinstance(k_new, int) or k_new < 1:
        raise ValueError(f"new compression parameter must be a positive integer, got {k_new!r}")
    if k_new >= q.k:
        raise ValueError(f"can only recompress to a strictly smaller k ({k_new} >= {q.k})")
    return iterative_compress(QDigest(q.sigma, k_new, q._counts, q.leaf_width))


def quantile_query(q: QDigest, fraction) -> int:
    """Smallest stored value estimated to be >= fraction * n values.

    Buckets are visited in post-order; the first bucket at which the
    accumulated count reaches fraction * n determines the answer, the
    maximum of its value range.  Comparisons are exact rational
    arithmetic, so prover and verifier can never disagree on a boundary.
    """
    frac = Fraction(fraction)
    if not 0 <= frac <= 1:
        raise ValueError(f"quantile fraction must be in [0, 1], got {fraction!r}")
    if q.n == 0:
        raise ValueError("cannot query an empty digest")
    target = frac * q.n
    acc = 0
    for i, c in q.post_order_buckets():
        acc += c
        if acc >= target:
            return node_range(i, q.sigma)[1] * q.leaf_width
    raise AssertionError("unreachable: accumulated count reaches n")


def rank_query(q: QDigest, x: int) -> int:
    """Lower-bound estimate of the rank of x: mass of buckets ending below x."""
    if not isinstance(x, int) or not 1 <= x <= q.domain_size:
        raise ValueError(f"value {x!r} out of domain [1, {q.domain_size}]")
    if q.n == 0:
        raise ValueError("cannot query an empty digest")
    return _rank_below(q, x)


def _rank_below(q: QDigest, x: int) -> int:
    return sum(
        c
        for i, c in q._counts.items()
        if node_range(i, q.sigma)[1] * q.leaf_width < x
    )


def range_query(q: QDigest, lo: int, hi: int) -> int:
    """Estimated number of stored values falling in [lo, hi]."""
    dom = q.domain_size
    if not (isinstance(lo, int) and isinstance(hi, int)) or not 1 <= lo <= hi <= dom:
        raise ValueError(f"invalid range [{lo!r}, {hi!r}] for domain [1, {dom}]")
    if q.n == 0:
        raise ValueError("cannot query an empty digest")
    return _rank_below(q, hi + 1) - _rank_below(q, lo)
