"""Shared generators and independent oracles for the test suite."""

import random
from fractions import Fraction

from qdigest_auth.digest import QDigest, build_from_frequencies, digest_sum
from qdigest_auth.tree import node_range

SIGMAS = [2**e for e in range(3, 11)]


def random_frequencies(rng: random.Random, sigma: int, max_distinct: int = 200, max_mult: int = 50):
    distinct = rng.randint(1, min(sigma, max_distinct))
    values = rng.sample(range(1, sigma + 1), distinct)
    return {v: rng.randint(1, max_mult) for v in values}


def random_digest(rng: random.Random, sigma: int | None = None, k: int | None = None) -> QDigest:
    sigma = sigma or rng.choice(SIGMAS)
    k = k or rng.randint(1, 64)
    return build_from_frequencies(random_frequencies(rng, sigma), k, sigma)


def random_sum(rng: random.Random, sigma: int | None = None, k: int | None = None) -> QDigest:
    sigma = sigma or rng.choice(SIGMAS)
    k = k or rng.randint(1, 64)
    a = build_from_frequencies(random_frequencies(rng, sigma), k, sigma)
    b = build_from_frequencies(random_frequencies(rng, sigma), k, sigma)
    return digest_sum(a, b)


def exact_quantile(freqs, fraction) -> int:
    """Brute-force oracle: smallest value whose cumulative count reaches q*n."""
    frac = Fraction(fraction)
    n = sum(freqs.values())
    target = frac * n
    acc = 0
    for value in sorted(freqs):
        acc += freqs[value]
        if acc >= target:
            return value
    raise AssertionError("unreachable for nonempty frequencies")


def rank_oracle(q: QDigest, x: int) -> int:
    """Independent enumeration of the rank rule: mass of buckets ending below x."""
    total = 0
    for node, cnt in q.buckets().items():
        if node_range(node, q.sigma)[1] * q.leaf_width < x:
            total += cnt
    return total


def grid(points: int = 101):
    return [Fraction(i, points - 1) for i in range(points)]
