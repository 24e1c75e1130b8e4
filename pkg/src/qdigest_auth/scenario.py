"""Three-party (source / responder / user) simulation harness.

A session follows the authenticated-data-structure model: a trusted
source builds a digest and its authentication information, an untrusted
responder answers quantile queries, and the user verifies each answer
under the chosen scheme.  The trusted store is an in-process value here;
distributing it is assumed to happen out of band.

Also implemented are the deployment patterns built on merging: cumulative
digests over a stream (full or sliding-window), and privacy profiles that
publish one digest per privilege level at decreasing compression
parameters and optionally coarser leaves.
"""

from dataclasses import dataclass, field
from fractions import Fraction

from .commitment import Commitment, commit_digest, subtree_commitment
from .digest import (
    QDigest,
    build_from_frequencies,
    coarsen,
    merge,
    quantile_query,
    validate,
)
from .kvcqa import aqq, malicious_aqq_omit_left, proof_to_text, qqv, qqv_accelerated
from .serialize import digest_to_bytes
from .tree import level
from .wda import WdaAuthInfo, wda_authinfo, wda_verify

SCHEMES = ("wda", "kvc_qa", "kvc_qa_accelerated")
BEHAVIORS = ("honest", "omit_left", "tamper_count")


@dataclass(frozen=True)
class ResponderBehavior:
    kind: str
    omit: frozenset = frozenset()
    node: int = 0
    delta: int = 0

    def __post_init__(self):
        if self.kind not in BEHAVIORS:
            raise ValueError(f"unknown responder behavior {self.kind!r}")
        if self.kind == "omit_left" and not self.omit:
            raise ValueError("omit_left behavior needs a nonempty omission set")
        if self.kind == "tamper_count" and self.delta == 0:
            raise ValueError("tamper_count behavior needs a nonzero delta")

    @classmethod
    def honest(cls) -> "ResponderBehavior":
        return cls("honest")

    @classmethod
    def omit_left(cls, nodes) -> "ResponderBehavior":
        return cls("omit_left", omit=frozenset(nodes))

    @classmethod
    def tamper_count(cls, node: int, delta: int) -> "ResponderBehavior":
        return cls("tamper_count", node=node, delta=delta)


@dataclass(frozen=True)
class PartyScript:
    scheme: str
    behavior: ResponderBehavior
    queries: tuple[Fraction, ...]

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}")
        if self.behavior.kind == "omit_left" and self.scheme == "wda":
            raise ValueError("omit_left is only meaningful under commitment-based schemes")
        object.__setattr__(self, "queries", tuple(Fraction(q) for q in self.queries))
        for q in self.queries:
            if not 0 <= q <= 1:
                raise ValueError(f"query fraction {q} out of [0, 1]")


@dataclass(frozen=True)
class QueryRecord:
    q: Fraction
    answer: int
    accepted: bool
    insert_ops: int
    bytes_moved: int
    reason: str

    def transcript_line(self) -> str:
        return (
            f"query={self.q.numerator}/{self.q.denominator} answer={self.answer} "
            f"accepted={1 if self.accepted else 0} insert_ops={self.insert_ops} "
            f"bytes={self.bytes_moved}"
        )


def _tampered_copy(q: QDigest, node: int, delta: int) -> QDigest:
    counts = q.buckets()
    new = counts.get(node, 0) + delta
    if new <= 0:
        counts.pop(node, None)
    else:
        counts[node] = new
    return QDigest(q.sigma, q.k, counts, q.leaf_width)


def run_session(script: PartyScript, freqs, k: int, sigma: int) -> list[QueryRecord]:
    """Build, serve, and verify one full session; returns one record per query."""
    return run_session_on_digest(script, build_from_frequencies(freqs, k, sigma))


def run_session_on_digest(script: PartyScript, source_digest: QDigest) -> list[QueryRecord]:
    """Session over a prebuilt source digest (also used for cumulative runs)."""
    auth = wda_authinfo(source_digest)
    trusted_c = commit_digest(source_digest)
    trusted_n = source_digest.n
    sigma = source_digest.sigma
    precomputed = {2: subtree_commitment(source_digest, 2)} if sigma > 1 else {}

    if script.behavior.kind == "tamper_count":
        responder_digest = _tampered_copy(source_digest, script.behavior.node, script.behavior.delta)
    else:
        responder_digest = source_digest

    records = []
    if responder_digest.n == 0:
        # tampering emptied the digest; nothing to query, every answer is refused
        for q in script.queries:
            records.append(QueryRecord(q, 0, False, 0, 0, "empty-response"))
        return records
    for q in script.queries:
        if script.scheme == "wda":
            payload = digest_to_bytes(responder_digest)
            verdict = wda_verify(responder_digest, auth)
            answer = quantile_query(responder_digest, q)
            records.append(
                QueryRecord(q, answer, verdict.accepted, 0, len(payload), verdict.reason)
            )
            continue

        if script.behavior.kind == "omit_left":
            proof = malicious_aqq_omit_left(responder_digest, q, script.behavior.omit)
        else:
            proof = aqq(responder_digest, q)
        payload = proof_to_text(proof).encode("ascii")
        if script.scheme == "kvc_qa":
            stats = qqv(proof, trusted_c, trusted_n, sigma, source_digest.leaf_width)
        else:
            stats = qqv_accelerated(
                proof, trusted_c, precomputed, trusted_n, sigma, source_digest.leaf_width
            )
        records.append(
            QueryRecord(q, proof.answer, stats.accepted, stats.insert_ops, len(payload), stats.reason)
        )
    return records


# ---------------------------------------------------------------------------
# Cumulative digests


@dataclass(frozen=True)
class CumulativeState:
    """Running merge of a stream of digests.

    With width 0 the state keeps one ever-growing digest; n grows without
    bound and the fixed k eventually over-compresses new data.  With a
    positive width only the most recent `width` digests contribute: the
    window merge is recomputed from the retained digests, since q-digests
    cannot subtract expired ones.
    """

    current: QDigest | None = None
    width: int = 0
    window: tuple[QDigest, ...] = ()
    history_len: int = 0


def cumulative_update(state: CumulativeState, q: QDigest) -> CumulativeState:
    if state.current is not None:
        ref = state.current
        if (ref.sigma, ref.k, ref.leaf_width) != (q.sigma, q.k, q.leaf_width):
            raise ValueError("incompatible digest fed to cumulative state")
    if state.width:
        window = (state.window + (q,))[-state.width:]
        current = window[0]
        for item in window[1:]:
            current = merge(current, item)
        return CumulativeState(current, state.width, window, state.history_len + 1)
    current = q if state.current is None else merge(state.current, q)
    return CumulativeState(current, 0, (), state.history_len + 1)


def mean_bucket_depth(q: QDigest) -> float:
    """Mean tree level of the buckets (root = 0); gauges how compressed a digest is."""
    if q.size == 0:
        raise ValueError("empty digest has no bucket depth")
    return sum(level(i) for i in q.buckets()) / q.size


# ---------------------------------------------------------------------------
# Privacy profiles


@dataclass(frozen=True)
class PrivacyProfile:
    """One digest and auth-info pair per privilege level, most privileged first."""

    levels: tuple[tuple[str, int], ...]
    digests: dict[str, QDigest] = field(hash=False)
    authinfo: dict[str, tuple[WdaAuthInfo, Commitment]] = field(hash=False)


def build_privacy_profile(freqs, sigma: int, levels, coarse_levels=None) -> PrivacyProfile:
    """Build per-privilege digests with strictly decreasing k.

    Lower privilege means a smaller k (more compression, less precision)
    and, when coarse_levels is given, a nondecreasing number of tree
    levels cut away (wider leaves, a hard floor on precision).
    """
    levels = tuple((str(name), int(k)) for name, k in levels)
    if not levels:
        raise ValueError("need at least one privilege level")
    ks = [k for _, k in levels]
    if any(lower >= higher for higher, lower in zip(ks, ks[1:])):
        raise ValueError("k values must be strictly decreasing with decreasing privilege")
    if coarse_levels is None:
        cuts = [0] * len(levels)
    else:
        cuts = [int(c) for c in coarse_levels]
        if len(cuts) != len(levels):
            raise ValueError("coarse_levels must match the number of privilege levels")
        if any(a > b for a, b in zip(cuts, cuts[1:])):
            raise ValueError("coarse levels must be nondecreasing with decreasing privilege")
    digests = {}
    authinfo = {}
    for (name, k), cut in zip(levels, cuts):
        q = coarsen(freqs, k, sigma, cut)
        report = validate(q)
        assert report.ok, f"level {name} produced an invalid digest"
        digests[name] = q
        authinfo[name] = (wda_authinfo(q), commit_digest(q))
    return PrivacyProfile(levels=levels, digests=digests, authinfo=authinfo)


# ---------------------------------------------------------------------------
# Scenario files and transcripts


@dataclass(frozen=True)
class Scenario:
    script: PartyScript
    window: int = 0
    updates: int = 1
    levels: tuple[tuple[str, int], ...] = ()
    coarse: tuple[int, ...] = ()


def parse_scenario(text: str) -> Scenario:
    """Parse the line-oriented scenario format.

    Keys: scheme=, behavior=, queries= (required); window=, updates=,
    levels= (optional).  behavior is `honest`, `omit_left:<i,j,...>`, or
    `tamper_count:<node>:<delta>`; levels entries are `name:k` or
    `name:k:coarse`.
    """
    fields = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, eq, value = line.partition("=")
        if not eq or key in fields:
            raise ValueError(f"line {lineno}: malformed scenario entry {raw!r}")
        fields[key.strip()] = value.strip()
    missing = {"scheme", "behavior", "queries"} - set(fields)
    if missing:
        raise ValueError(f"scenario is missing keys: {sorted(missing)}")

    behavior_text = fields["behavior"]
    if behavior_text == "honest":
        behavior = ResponderBehavior.honest()
    elif behavior_text.startswith("omit_left:"):
        nodes = [int(x) for x in behavior_text[len("omit_left:"):].split(",") if x]
        behavior = ResponderBehavior.omit_left(nodes)
    elif behavior_text.startswith("tamper_count:"):
        parts = behavior_text.split(":")
        if len(parts) != 3:
            raise ValueError(f"malformed tamper_count behavior: {behavior_text!r}")
        behavior = ResponderBehavior.tamper_count(int(parts[1]), int(parts[2]))
    else:
        raise ValueError(f"unknown behavior {behavior_text!r}")

    queries = [Fraction(part) for part in fields["queries"].split(",") if part]
    script = PartyScript(scheme=fields["scheme"], behavior=behavior, queries=tuple(queries))

    levels, coarse = parse_levels(fields["levels"]) if "levels" in fields else ((), ())
    return Scenario(
        script=script,
        window=int(fields.get("window", 0)),
        updates=int(fields.get("updates", 1)),
        levels=levels,
        coarse=coarse,
    )


def parse_levels(text: str) -> tuple[tuple[tuple[str, int], ...], tuple[int, ...]]:
    """Parse `name:k` / `name:k:coarse` entries into (levels, coarse) tuples."""
    levels = []
    coarse = []
    for entry in text.split(","):
        parts = entry.split(":")
        try:
            if len(parts) == 2:
                levels.append((parts[0], int(parts[1])))
                coarse.append(0)
            elif len(parts) == 3:
                levels.append((parts[0], int(parts[1])))
                coarse.append(int(parts[2]))
            else:
                raise ValueError
        except ValueError:
            raise ValueError(f"malformed level entry {entry!r}") from None
    return tuple(levels), tuple(coarse)


def _split_stream(freqs, updates: int) -> list[dict[int, int]]:
    """Deal the (value, multiplicity) pairs round-robin into `updates` slices."""
    slices: list[dict[int, int]] = [{} for _ in range(updates)]
    for pos, value in enumerate(sorted(freqs)):
        slices[pos % updates][value] = freqs[value]
    return [s for s in slices if s]


def run_scenario(scenario: Scenario, freqs, k: int, sigma: int) -> list[str]:
    """Run a scenario file against a frequency set; returns transcript lines."""
    lines = []
    if scenario.levels:
        profile = build_privacy_profile(
            freqs, sigma, scenario.levels, scenario.coarse if any(scenario.coarse) else None
        )
        for name, level_k in scenario.levels:
            digest = profile.digests[name]
            lines.append(f"# level={name} k={level_k} size={digest.size}")
            records = run_session_on_digest(scenario.script, digest)
            lines.extend(r.transcript_line() for r in records)
        return lines

    if scenario.updates > 1 or scenario.window:
        state = CumulativeState(width=scenario.window)
        for chunk in _split_stream(freqs, max(scenario.updates, 1)):
            state = cumulative_update(state, build_from_frequencies(chunk, k, sigma))
        lines.append(
            f"# cumulative updates={state.history_len} window={scenario.window} "
            f"n={state.current.n} size={state.current.size}"
        )
        records = run_session_on_digest(scenario.script, state.current)
        lines.extend(r.transcript_line() for r in records)
        return lines

    records = run_session(scenario.script, freqs, k, sigma)
    lines.extend(r.transcript_line() for r in records)
    return lines
