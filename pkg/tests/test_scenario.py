import random
from fractions import Fraction

import pytest

from qdigest_auth.digest import build_from_frequencies, validate
from qdigest_auth.scenario import (
    CumulativeState,
    PartyScript,
    ResponderBehavior,
    build_privacy_profile,
    cumulative_update,
    mean_bucket_depth,
    parse_scenario,
    run_scenario,
    run_session,
)
from qdigest_auth.serialize import digest_to_bytes

from helpers import exact_quantile, grid, random_frequencies

QUERIES = (Fraction(0), Fraction(1, 2), Fraction(1))


class TestScripts:
    def test_omit_left_requires_commitment_scheme(self):
        with pytest.raises(ValueError):
            PartyScript("wda", ResponderBehavior.omit_left({10}), QUERIES)

    def test_tamper_needs_nonzero_delta(self):
        with pytest.raises(ValueError):
            ResponderBehavior.tamper_count(4, 0)

    def test_unknown_scheme(self):
        with pytest.raises(ValueError):
            PartyScript("merkle", ResponderBehavior.honest(), QUERIES)


class TestSessions:
    def test_honest_wda_accepts_and_ships_whole_digest(self, s1):
        script = PartyScript("wda", ResponderBehavior.honest(), QUERIES)
        records = run_session(script, s1, 4, 8)
        digest_bytes = len(digest_to_bytes(build_from_frequencies(s1, 4, 8)))
        for rec in records:
            assert rec.accepted
            assert rec.bytes_moved == digest_bytes
            assert rec.insert_ops == 0

    def test_honest_kvc_accepts(self, s1):
        script = PartyScript("kvc_qa", ResponderBehavior.honest(), QUERIES)
        assert all(rec.accepted for rec in run_session(script, s1, 4, 8))

    def test_honest_accelerated_never_costs_more(self, s1):
        plain = run_session(PartyScript("kvc_qa", ResponderBehavior.honest(), QUERIES), s1, 4, 8)
        accel = run_session(
            PartyScript("kvc_qa_accelerated", ResponderBehavior.honest(), QUERIES), s1, 4, 8
        )
        for p, a in zip(plain, accel):
            assert a.accepted == p.accepted
            assert a.insert_ops <= p.insert_ops

    def test_omit_left_rejected(self, s1):
        # bucket 4 is the first post-order bucket of the s1 digest
        script = PartyScript("kvc_qa", ResponderBehavior.omit_left({4}), (Fraction(1, 2),))
        records = run_session(script, s1, 4, 8)
        assert records[0].accepted is False

    def test_worked_attack_session(self, example2_freqs, example2_digest):
        # the frequency set reconstructs the worked-example digest, so the
        # whole three-party attack run can be replayed end to end
        assert build_from_frequencies(example2_freqs, 5, 8) == example2_digest
        script = PartyScript("kvc_qa", ResponderBehavior.omit_left({10}), (Fraction(1, 2),))
        record = run_session(script, example2_freqs, 5, 8)[0]
        assert record.answer == 6
        assert not record.accepted

    def test_tampering_rejected_under_both_schemes(self, s1):
        for scheme in ("wda", "kvc_qa", "kvc_qa_accelerated"):
            script = PartyScript(scheme, ResponderBehavior.tamper_count(12, 2), QUERIES)
            records = run_session(script, s1, 4, 8)
            assert all(not rec.accepted for rec in records), scheme

    def test_transcript_line_format(self, s1):
        script = PartyScript("kvc_qa", ResponderBehavior.honest(), (Fraction(1, 2),))
        line = run_session(script, s1, 4, 8)[0].transcript_line()
        assert line.startswith("query=1/2 answer=")
        assert " accepted=1 " in line and " insert_ops=" in line and " bytes=" in line


class TestCumulative:
    def test_first_update_is_adopted_unchanged(self, s1):
        q0 = build_from_frequencies(s1, 4, 8)
        state = cumulative_update(CumulativeState(), q0)
        assert state.current == q0
        assert state.history_len == 1

    def test_full_mode_mass_accumulates(self):
        rng = random.Random(2)
        state = CumulativeState()
        total = 0
        for _ in range(10):
            q = build_from_frequencies(random_frequencies(rng, 64, max_distinct=20), 4, 64)
            total += q.n
            state = cumulative_update(state, q)
        assert state.current.n == total
        assert state.history_len == 10

    def test_windowed_mode_bounds_mass(self):
        rng = random.Random(3)
        w = 5
        state = CumulativeState(width=w)
        per_digest = []
        for _ in range(20):
            q = build_from_frequencies(random_frequencies(rng, 64, max_distinct=20), 4, 64)
            per_digest.append(q.n)
            state = cumulative_update(state, q)
            assert state.current.n == sum(per_digest[-w:])
        assert state.current.n <= w * max(per_digest)

    def test_incompatible_digest_refused(self, s1):
        state = cumulative_update(CumulativeState(), build_from_frequencies(s1, 4, 8))
        with pytest.raises(ValueError):
            cumulative_update(state, build_from_frequencies(s1, 5, 8))

    def test_distribution_shift_depth_degrades_without_window(self):
        # lower-half-heavy stream followed by an upper-half-heavy stream:
        # the ever-growing cumulative digest ends with shallow buckets while
        # the sliding window keeps resolution near the leaves
        rng = random.Random(9)
        sigma, k, w = 64, 4, 5
        full = CumulativeState()
        windowed = CumulativeState(width=w)
        for i in range(50):
            if i < 25:
                values = range(1, sigma // 2 + 1)
            else:
                values = range(sigma // 2 + 1, sigma + 1)
            freqs = {v: rng.randint(1, 8) for v in rng.sample(list(values), 16)}
            q = build_from_frequencies(freqs, k, sigma)
            full = cumulative_update(full, q)
            windowed = cumulative_update(windowed, q)
        assert mean_bucket_depth(full.current) < mean_bucket_depth(windowed.current)


class TestPrivacyProfile:
    def test_k_one_level_collapses_to_root(self, s1):
        profile = build_privacy_profile(s1, 8, [("p1", 64), ("p2", 8), ("p3", 1)])
        assert profile.digests["p3"].buckets() == {1: 38}

    def test_each_level_validates_and_sizes_shrink(self):
        rng = random.Random(21)
        freqs = random_frequencies(rng, 256, max_distinct=120)
        profile = build_privacy_profile(freqs, 256, [("p1", 64), ("p2", 8), ("p3", 1)])
        sizes = [profile.digests[name].size for name, _ in profile.levels]
        for (name, k) in profile.levels:
            q = profile.digests[name]
            assert validate(q).ok
            assert q.size <= 4 * k + 1
        assert sizes[0] >= sizes[1] >= sizes[2]

    def test_error_grows_as_privilege_drops(self):
        from qdigest_auth.digest import quantile_query

        rng = random.Random(8)
        freqs = random_frequencies(rng, 256, max_distinct=150)
        profile = build_privacy_profile(freqs, 256, [("p1", 512), ("p2", 8), ("p3", 1)])

        def mean_error(q):
            return sum(
                abs(exact_quantile(freqs, frac) - quantile_query(q, frac)) for frac in grid(21)
            ) / 21

        errors = [mean_error(profile.digests[name]) for name, _ in profile.levels]
        assert errors[0] <= errors[1] <= errors[2]

    def test_non_monotone_parameters_refused(self, s1):
        with pytest.raises(ValueError):
            build_privacy_profile(s1, 8, [("p1", 4), ("p2", 4)])
        with pytest.raises(ValueError):
            build_privacy_profile(s1, 8, [("p1", 8), ("p2", 4)], coarse_levels=[1, 0])

    def test_coarse_levels_floor_precision(self, s1):
        profile = build_privacy_profile(s1, 8, [("p1", 8), ("p2", 4)], coarse_levels=[0, 1])
        assert profile.digests["p2"].leaf_width == 2


class TestScenarioFiles:
    def test_parse_minimal(self):
        scenario = parse_scenario("scheme=kvc_qa\nbehavior=honest\nqueries=0/1,1/2\n")
        assert scenario.script.scheme == "kvc_qa"
        assert scenario.script.queries == (Fraction(0), Fraction(1, 2))

    def test_parse_behaviors_and_options(self):
        scenario = parse_scenario(
            "# comment\nscheme=kvc_qa\nbehavior=omit_left:4,5\nqueries=1/2\nwindow=3\nupdates=6\n"
        )
        assert scenario.script.behavior.omit == frozenset({4, 5})
        assert scenario.window == 3 and scenario.updates == 6
        tampered = parse_scenario("scheme=wda\nbehavior=tamper_count:12:-1\nqueries=1/2\n")
        assert tampered.script.behavior.node == 12
        assert tampered.script.behavior.delta == -1

    def test_parse_rejects_missing_keys(self):
        with pytest.raises(ValueError):
            parse_scenario("scheme=wda\n")

    def test_run_scenario_transcripts(self, s1):
        scenario = parse_scenario("scheme=kvc_qa\nbehavior=honest\nqueries=0/1,1/2,1/1\n")
        lines = run_scenario(scenario, s1, 4, 8)
        assert len(lines) == 3
        assert all(line.startswith("query=") for line in lines)
        assert all(" accepted=1 " in line for line in lines)

    def test_run_scenario_with_levels(self, s1):
        scenario = parse_scenario(
            "scheme=kvc_qa\nbehavior=honest\nqueries=1/2\nlevels=p1:8,p2:2,p3:1\n"
        )
        lines = run_scenario(scenario, s1, 4, 8)
        assert sum(1 for line in lines if line.startswith("# level=")) == 3
        assert sum(1 for line in lines if line.startswith("query=")) == 3

    def test_run_scenario_with_window(self, s1):
        scenario = parse_scenario(
            "scheme=kvc_qa\nbehavior=honest\nqueries=1/2\nwindow=2\nupdates=4\n"
        )
        lines = run_scenario(scenario, s1, 4, 8)
        assert lines[0].startswith("# cumulative updates=4 window=2 ")
        assert lines[1].startswith("query=1/2 ") and " accepted=1 " in lines[1]
