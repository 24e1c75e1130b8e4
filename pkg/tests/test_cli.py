import random
from fractions import Fraction

import pytest

from qdigest_auth.cli import main
from qdigest_auth.digest import build_from_frequencies, merge, quantile_query
from qdigest_auth.serialize import dump_frequencies, load_digest

from helpers import random_frequencies


def write_freqs(path, freqs):
    dump_frequencies(freqs, path)
    return str(path)


@pytest.fixture
def s1_file(tmp_path, s1):
    return write_freqs(tmp_path / "s1.tsv", s1)


@pytest.fixture
def s2_file(tmp_path, s2):
    return write_freqs(tmp_path / "s2.tsv", s2)


def test_build(tmp_path, s1_file, s1, capsys):
    out = tmp_path / "q1.qd"
    assert main(["build", s1_file, "--sigma", "8", "--k", "4", "--output", str(out)]) == 0
    assert load_digest(out) == build_from_frequencies(s1, 4, 8)
    printed = capsys.readouterr().out
    assert "n=38" in printed and "size=6" in printed

def test_build_empty_file(tmp_path, capsys):
    freq = tmp_path / "empty.tsv"
    freq.write_text("")
    out = tmp_path / "empty.qd"
    assert main(["build", str(freq), "--sigma", "8", "--k", "4", "--output", str(out)]) == 0
    assert load_digest(out).n == 0


def test_build_rejects_out_of_domain(tmp_path, capsys):
    freq = tmp_path / "bad.tsv"
    freq.write_text("9\t1\n")
    out = tmp_path / "bad.qd"
    code = main(["build", str(freq), "--sigma", "8", "--k", "4", "--output", str(out)])
    assert code == 2
    assert "out of domain" in capsys.readouterr().err


def test_merge_and_query(tmp_path, s1_file, s2_file, s1, s2, capsys):
    a, b, m = tmp_path / "a.qd", tmp_path / "b.qd", tmp_path / "m.qd"
    main(["build", s1_file, "--sigma", "8", "--k", "4", "--output", str(a)])
    main(["build", s2_file, "--sigma", "8", "--k", "4", "--output", str(b)])
    assert main(["merge", str(a), str(b), "--output", str(m)]) == 0
    expected = merge(build_from_frequencies(s1, 4, 8), build_from_frequencies(s2, 4, 8))
    assert load_digest(m) == expected
    capsys.readouterr()
    assert main(["query", str(m), "--q", "1/2"]) == 0
    assert capsys.readouterr().out.strip() == str(quantile_query(expected, Fraction(1, 2)))


def test_merge_with_empty_digest(tmp_path, s1_file, s1, capsys):
    a, e, m = tmp_path / "a.qd", tmp_path / "e.qd", tmp_path / "m.qd"
    (tmp_path / "none.tsv").write_text("")
    main(["build", s1_file, "--sigma", "8", "--k", "4", "--output", str(a)])
    main(["build", str(tmp_path / "none.tsv"), "--sigma", "8", "--k", "4", "--output", str(e)])
    assert main(["merge", str(a), str(e), "--output", str(m)]) == 0
    assert load_digest(m) == build_from_frequencies(s1, 4, 8)


def test_merge_mismatched_sigma(tmp_path, s1_file, capsys):
    a, b = tmp_path / "a.qd", tmp_path / "b.qd"
    main(["build", s1_file, "--sigma", "8", "--k", "4", "--output", str(a)])
    main(["build", s1_file, "--sigma", "16", "--k", "4", "--output", str(b)])
    assert main(["merge", str(a), str(b), "--output", str(tmp_path / "m.qd")]) == 2


def test_auth_prove_verify_round_trip(tmp_path, s1_file, capsys):
    digest = tmp_path / "q.qd"
    wda_f, kvc_f, proof = tmp_path / "q.wda", tmp_path / "q.kvc", tmp_path / "q.proof"
    main(["build", s1_file, "--sigma", "8", "--k", "4", "--output", str(digest)])
    assert main(["auth", str(digest), "--wda-out", str(wda_f), "--kvc-out", str(kvc_f)]) == 0
    assert main(["prove", str(digest), "--q", "1/2", "--output", str(proof)]) == 0
    assert main(["verify", "--proof", str(proof), "--auth", str(kvc_f)]) == 0
    assert main(["verify", "--proof", str(proof), "--auth", str(kvc_f), "--accelerated"]) == 0
    assert main(["verify", "--digest", str(digest), "--auth", str(wda_f)]) == 0


def test_verify_rejects_tampered_proof(tmp_path, s1_file, capsys):
    digest, kvc_f, proof = tmp_path / "q.qd", tmp_path / "q.kvc", tmp_path / "q.proof"
    main(["build", s1_file, "--sigma", "8", "--k", "4", "--output", str(digest)])
    main(["auth", str(digest), "--wda-out", str(tmp_path / "q.wda"), "--kvc-out", str(kvc_f)])
    main(["prove", str(digest), "--q", "1/2", "--output", str(proof)])
    text = proof.read_text().replace("4:3", "4:4")
    proof.write_text(text)
    capsys.readouterr()
    assert main(["verify", "--proof", str(proof), "--auth", str(kvc_f)]) == 1
    assert "commitment-mismatch" in capsys.readouterr().out


def test_verify_rejects_tampered_digest(tmp_path, s1_file, capsys):
    digest, wda_f = tmp_path / "q.qd", tmp_path / "q.wda"
    main(["build", s1_file, "--sigma", "8", "--k", "4", "--output", str(digest)])
    main(["auth", str(digest), "--wda-out", str(wda_f), "--kvc-out", str(tmp_path / "q.kvc")])
    digest.write_bytes(digest.read_bytes().replace(b"4:3", b"4:4"))
    assert main(["verify", "--digest", str(digest), "--auth", str(wda_f)]) == 1


def test_verify_needs_exactly_one_input(tmp_path, capsys):
    assert main(["verify", "--auth", str(tmp_path / "x")]) == 2


def test_coarse_build(tmp_path, s1_file, capsys):
    out = tmp_path / "c.qd"
    assert main(
        ["build", s1_file, "--sigma", "8", "--k", "4", "--coarse", "1", "--output", str(out)]
    ) == 0
    q = load_digest(out)
    assert q.sigma == 4 and q.leaf_width == 2


def test_simulate(tmp_path, s1_file, capsys):
    scn = tmp_path / "s.scn"
    scn.write_text("scheme=kvc_qa\nbehavior=omit_left:4\nqueries=1/2\n")
    assert main(["simulate", str(scn), s1_file, "--sigma", "8", "--k", "4"]) == 0
    out = capsys.readouterr().out
    assert "accepted=0" in out


def test_simulate_window_override(tmp_path, s1_file, capsys):
    scn = tmp_path / "s.scn"
    scn.write_text("scheme=kvc_qa\nbehavior=honest\nqueries=1/2\nupdates=4\n")
    assert main(["simulate", str(scn), s1_file, "--sigma", "8", "--k", "4", "--window", "2"]) == 0
    out = capsys.readouterr().out
    assert "window=2" in out


def test_bench_table(capsys):
    assert main(["bench", "--sigmas", "8,16", "--ks", "2", "--qs", "1/2", "--seed", "1"]) == 0
    out = capsys.readouterr().out.splitlines()
    assert len(out) == 3  # header + one row per sigma
    assert out[0].lstrip().startswith("sigma")


def test_cli_outputs_are_deterministic(tmp_path, s1_file):
    a, b = tmp_path / "a.qd", tmp_path / "b.qd"
    main(["build", s1_file, "--sigma", "8", "--k", "4", "--output", str(a)])
    main(["build", s1_file, "--sigma", "8", "--k", "4", "--output", str(b)])
    assert a.read_bytes() == b.read_bytes()


def test_random_round_trips(tmp_path, capsys):
    rng = random.Random(99)
    for i in range(50):
        sigma = rng.choice([8, 16, 32])
        k = rng.randint(1, 8)
        freqs = random_frequencies(rng, sigma, max_distinct=20)
        freq_file = write_freqs(tmp_path / f"f{i}.tsv", freqs)
        digest = tmp_path / f"d{i}.qd"
        kvc_f = tmp_path / f"k{i}.kvc"
        proof = tmp_path / f"p{i}.proof"
        num = rng.randint(0, 8)
        assert main(["build", freq_file, "--sigma", str(sigma), "--k", str(k),
                     "--output", str(digest)]) == 0
        assert main(["auth", str(digest), "--wda-out", str(tmp_path / f"w{i}.wda"),
                     "--kvc-out", str(kvc_f)]) == 0
        assert main(["prove", str(digest), "--q", f"{num}/8", "--output", str(proof)]) == 0
        assert main(["verify", "--proof", str(proof), "--auth", str(kvc_f)]) == 0
        assert main(["verify", "--digest", str(digest),
                     "--auth", str(tmp_path / f"w{i}.wda")]) == 0
