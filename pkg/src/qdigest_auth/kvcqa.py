"""Commitment-authenticated quantile queries.

The responder answers a quantile query with the post-order prefix of
buckets it counted plus a *remainder* commitment covering every tree
node strictly after the stop bucket (empty nodes committed at value 0).
The verifier completes the commitment by inserting one record per tree
node up to and including the stop bucket -- counts taken from the prefix
for listed nodes, 0 otherwise -- and accepts only if the result equals
the trusted whole-digest commitment and the prefix sums bracket q*n.

Inserting the zeros is not optional: without them a malicious responder
can omit an early bucket from the counted prefix and hide its insertion
in the remainder, shifting the reported answer rightward while the
commitment still balances.  With them, the verifier's (index, 0)
insertion for the omitted node gives that key multiplicity two against
one in the trusted commitment, and verification fails.

All q*n comparisons use exact rational arithmetic so prover and verifier
can never disagree on a boundary.
"""

from dataclasses import dataclass
from fractions import Fraction

from .commitment import (
    Commitment,
    combine,
    initialize,
    insert,
    inverse,
    zero_subtree_commitment,
)
from .digest import QDigest
from .tree import (
    check_node,
    is_in_subtree,
    node_range,
    post_order_nodes,
    post_order_rank,
    subtree_rank_interval,
    subtree_size,
)

REASON_OK = "ok"
REASON_COUNT_TOO_LOW = "count-too-low"
REASON_PREFIX_OVERSHOOT = "prefix-overshoot"
REASON_COMMITMENT_MISMATCH = "commitment-mismatch"
REASON_MALFORMED = "malformed"


@dataclass(frozen=True)
class QuantileProof:
    """Responder's reply: answer, counted post-order prefix, remainder commitment."""

    q: Fraction
    n: int
    answer: int
    counted: tuple[tuple[int, int], ...]
    remainder: Commitment


@dataclass(frozen=True)
class VerificationStats:
    accepted: bool
    reason: str
    insert_ops: int


def aqq(q: QDigest, fraction) -> QuantileProof:
    """Authenticated quantile query (honest responder)."""
    frac = Fraction(fraction)
    if not 0 <= frac <= 1:
        raise ValueError(f"quantile fraction must be in [0, 1], got {fraction!r}")
    if q.n == 0:
        raise ValueError("cannot query an empty digest")
    target = frac * q.n
    ordered = q.post_order_buckets()
    acc = 0
    stop_pos = None
    for pos, (_, cnt) in enumerate(ordered):
        acc += cnt
        if acc >= target:
            stop_pos = pos
            break
    assert stop_pos is not None  # acc reaches n >= target at the last bucket
    counted = tuple(ordered[: stop_pos + 1])
    stop = counted[-1][0]
    remainder = _fold_after(q, post_order_rank(stop, q.sigma))
    answer = node_range(stop, q.sigma)[1] * q.leaf_width
    return QuantileProof(q=frac, n=q.n, answer=answer, counted=counted, remainder=remainder)


def malicious_aqq_omit_left(q: QDigest, fraction, omit) -> QuantileProof:
    """The omit-left adversary: count as if `omit` buckets came after the stop.

    Omitted buckets are dropped from the counted prefix and their true
    insertions are folded into the remainder instead, skewing the
    accumulation so a later bucket answers the query.  `omit` must be a
    subset of the buckets strictly before the honest stop bucket.
    """
    frac = Fraction(fraction)
    if not 0 <= frac <= 1:
        raise ValueError(f"quantile fraction must be in [0, 1], got {fraction!r}")
    if q.n == 0:
        raise ValueError("cannot query an empty digest")
    omit = frozenset(omit)
    target = frac * q.n
    ordered = q.post_order_buckets()

    acc = 0
    honest_stop_pos = None
    for pos, (_, cnt) in enumerate(ordered):
        acc += cnt
        if acc >= target:
            honest_stop_pos = pos
            break
    before_honest = {i for i, _ in ordered[:honest_stop_pos]}
    if not omit <= before_honest:
        raise ValueError("omission set must contain only buckets before the honest stop bucket")

    acc = 0
    counted = []
    for node, cnt in ordered:
        if node in omit:
            continue
        counted.append((node, cnt))
        acc += cnt
        if acc >= target:
            break
    # if the omitted mass made q*n unreachable, the last bucket is claimed anyway
    stop = counted[-1][0]
    remainder = _fold_after(q, post_order_rank(stop, q.sigma))
    for node in sorted(omit):
        remainder = insert(remainder, node, q.count(node))
    answer = node_range(stop, q.sigma)[1] * q.leaf_width
    return QuantileProof(q=frac, n=q.n, answer=answer, counted=tuple(counted), remainder=remainder)


def _fold_after(q: QDigest, stop_rank: int) -> Commitment:
    """Commit every tree node with post-order rank beyond stop_rank."""
    c = initialize()
    for pos, node in enumerate(post_order_nodes(q.sigma), start=1):
        if pos > stop_rank:
            c = insert(c, node, q.count(node))
    return c


def _shape_error(proof: QuantileProof, n: int, sigma: int, leaf_width: int):
    """Structural checks that need no commitment work; returns a reason or None."""
    if not isinstance(proof.q, Fraction) or not 0 <= proof.q <= 1:
        return "quantile out of range"
    if proof.n != n:
        return "claimed n disagrees with trusted n"
    if not proof.counted:
        return "empty counted prefix"
    last_rank = 0
    for node, cnt in proof.counted:
        if not isinstance(node, int) or not 1 <= node <= 2 * sigma - 1:
            return f"unknown node index {node!r}"
        if not isinstance(cnt, int) or cnt < 1:
            return f"non-positive count for node {node}"
        rank = post_order_rank(node, sigma)
        if rank <= last_rank:
            return "counted prefix is not strictly increasing in post-order"
        last_rank = rank
    stop = proof.counted[-1][0]
    if proof.answer != node_range(stop, sigma)[1] * leaf_width:
        return "answer does not match the stop bucket's range"
    return None


def qqv(proof: QuantileProof, c: Commitment, n: int, sigma: int, leaf_width: int = 1) -> VerificationStats:
    """Quantile query verification against the trusted commitment and n.

    Accepts iff (i) the counted prefix sums to at least q*n, (ii) the
    prefix without its last bucket stays below q*n (a single-bucket
    prefix is exempt: at q = 0 it is the shortest non-empty prefix and
    the honest responder must stop on the very first bucket), and (iii)
    folding one insertion per tree node up to the stop bucket into the
    remainder reproduces the trusted commitment exactly.
    """
    error = _shape_error(proof, n, sigma, leaf_width)
    if error is not None:
        return VerificationStats(False, REASON_MALFORMED, 0)
    target = proof.q * n
    total = sum(cnt for _, cnt in proof.counted)
    if total < target:
        return VerificationStats(False, REASON_COUNT_TOO_LOW, 0)
    if len(proof.counted) > 1 and total - proof.counted[-1][1] >= target:
        return VerificationStats(False, REASON_PREFIX_OVERSHOOT, 0)

    counted_map = dict(proof.counted)
    stop = proof.counted[-1][0]
    fold = proof.remainder
    ops = 0
    for node in post_order_nodes(sigma):
        fold = insert(fold, node, counted_map.get(node, 0))
        ops += 1
        if node == stop:
            break
    if fold != c:
        return VerificationStats(False, REASON_COMMITMENT_MISMATCH, ops)
    return VerificationStats(True, REASON_OK, ops)


def qqv_accelerated(
    proof: QuantileProof,
    c: Commitment,
    precomputed: dict[int, Commitment],
    n: int,
    sigma: int,
    leaf_width: int = 1,
) -> VerificationStats:
    """Verification using precomputed subtree commitments.

    When some precomputed subtree lies wholly before the stop bucket in
    post-order, its commitment is combined into the fold instead of
    inserting its nodes one by one.  Counted buckets claimed inside the
    skipped subtree are then cross-checked homomorphically: the subtree
    commitment minus the zero-fold of the same subtree must equal the
    fold of the claimed (insert minus zero-insert) differences, so a
    tampered or omitted count inside the subtree is still rejected and
    the accept/reject decision always matches the plain verifier.
    """
    error = _shape_error(proof, n, sigma, leaf_width)
    if error is not None:
        return VerificationStats(False, REASON_MALFORMED, 0)
    for root in precomputed:
        check_node(root, sigma)

    stop = proof.counted[-1][0]
    stop_rank = post_order_rank(stop, sigma)
    counted_map = dict(proof.counted)

    best = None
    for root in precomputed:
        if post_order_rank(root, sigma) >= stop_rank:
            continue
        size = subtree_size(root, sigma)
        inside = sum(1 for node in counted_map if is_in_subtree(node, root, sigma))
        if size <= 2 * inside:
            continue  # no net saving over inserting the nodes directly
        if best is None or size > best[1]:
            best = (root, size, inside)
    if best is None:
        return qqv(proof, c, n, sigma, leaf_width)

    target = proof.q * n
    total = sum(cnt for _, cnt in proof.counted)
    if total < target:
        return VerificationStats(False, REASON_COUNT_TOO_LOW, 0)
    if len(proof.counted) > 1 and total - proof.counted[-1][1] >= target:
        return VerificationStats(False, REASON_PREFIX_OVERSHOOT, 0)

    root = best[0]
    skip_lo, skip_hi = subtree_rank_interval(root, sigma)
    fold = combine(proof.remainder, precomputed[root])
    ops = 0
    for pos, node in enumerate(post_order_nodes(sigma), start=1):
        if pos > stop_rank:
            break
        if skip_lo <= pos <= skip_hi:
            continue
        fold = insert(fold, node, counted_map.get(node, 0))
        ops += 1

    # Cross-check the counted claims covered by the skipped subtree.
    expected = combine(precomputed[root], inverse(zero_subtree_commitment(sigma, root)))
    claimed = initialize()
    for node, cnt in proof.counted:
        if is_in_subtree(node, root, sigma):
            claimed = insert(claimed, node, cnt)
            claimed = combine(claimed, inverse(insert(initialize(), node, 0)))
            ops += 2
    if claimed != expected:
        return VerificationStats(False, REASON_COMMITMENT_MISMATCH, ops)

    if fold != c:
        return VerificationStats(False, REASON_COMMITMENT_MISMATCH, ops)
    return VerificationStats(True, REASON_OK, ops)


def proof_to_text(proof: QuantileProof) -> str:
    lines = [
        f"aqqproof v1 q={proof.q.numerator}/{proof.q.denominator} "
        f"n={proof.n} answer={proof.answer}"
    ]
    lines.extend(f"{node}:{cnt}" for node, cnt in proof.counted)
    lines.append(f"remainder={proof.remainder.encode()}")
    return "\n".join(lines) + "\n"


def proof_from_text(text: str) -> QuantileProof:
    lines = text.splitlines()
    if len(lines) < 2 or not lines[0].startswith("aqqproof v1 "):
        raise ValueError("malformed proof file")
    fields = {}
    for part in lines[0][len("aqqproof v1 "):].split(" "):
        key, eq, value = part.partition("=")
        if not eq or key in fields:
            raise ValueError(f"malformed proof header: {lines[0]!r}")
        fields[key] = value
    if set(fields) != {"q", "n", "answer"}:
        raise ValueError(f"malformed proof header: {lines[0]!r}")
    num, slash, den = fields["q"].partition("/")
    if not slash or not num.isdigit() or not den.isdigit() or int(den) == 0:
        raise ValueError(f"malformed quantile fraction: {fields['q']!r}")
    if not lines[-1].startswith("remainder="):
        raise ValueError("proof file must end with the remainder commitment")
    counted = []
    for line in lines[1:-1]:
        idx_text, sep, cnt_text = line.partition(":")
        if not sep or not idx_text.isdigit() or not cnt_text.isdigit():
            raise ValueError(f"malformed counted bucket line: {line!r}")
        counted.append((int(idx_text), int(cnt_text)))
    return QuantileProof(
        q=Fraction(int(num), int(den)),
        n=int(fields["n"]),
        answer=int(fields["answer"]),
        counted=tuple(counted),
        remainder=Commitment.parse(lines[-1][len("remainder="):]),
    )


def dump_proof(proof: QuantileProof, path) -> None:
    with open(path, "w", encoding="ascii") as fh:
        fh.write(proof_to_text(proof))


def load_proof(path) -> QuantileProof:
    with open(path, "r", encoding="ascii") as fh:
        return proof_from_text(fh.read())
