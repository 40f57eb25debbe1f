import random

import pytest

from jetsym import corpus


@pytest.fixture(scope="module")
def problems():
    return corpus.load_corpus()


@pytest.fixture(scope="module")
def results(problems):
    return {p.id: corpus.corpus_verify(p) for p in problems}


def test_every_assertion_passes(results):
    bad = [r for rs in results.values() for r in rs if r.status != "PASS"]
    assert not bad, "\n".join(f"{r.entry} {r.assertion} {r.status} {r.residual or r.detail}" for r in bad)


def test_tiers(problems):
    tiers = {p.id: p.tier for p in problems}
    assert tiers["bsq-X5"] == tiers["bsq-X7"] == tiers["kdv-X1-lny"] == "extended"
    assert tiers["kdv-X3-classify"] == "partial"
    assert all(t == "core" for k, t in tiers.items() if k.startswith(("bsq-X1", "bsq-X2", "bsq-X3", "bsq-X4", "bsq-X6", "fk-")))


def test_empty_entry_passes_vacuously(results):
    assert results["empty"] == []


def test_bsq_x1_entry(results):
    names = [r.assertion for r in results["bsq-X1"]]
    assert names == ["invariants", "reconstruct", "conditional", "degenerate"]


def test_laplace_entry(results):
    rs = {r.assertion: r for r in results["laplace-X1"]}
    assert rs["construct"].detail == "built u_yy = -u*u_xx"
    assert all(rs[f"point:Z{i}"].detail == "determining system agrees" for i in (1, 2, 3))


def test_entry_isolation(problems, results):
    shuffled = list(problems)
    random.Random(7).shuffle(shuffled)
    fresh = {p.id: corpus.corpus_verify(corpus.load_problem(p.path)) for p in shuffled
             if p.tier == "core" and p.id.startswith(("kdv-X1", "laplace", "bsq-X1", "fk"))}
    for pid, rs in fresh.items():
        assert [r.as_dict() for r in rs] == [r.as_dict() for r in results[pid]]


def test_unknown_section_is_rejected(tmp_path):
    path = tmp_path / "p.ini"
    path.write_text("[problem]\nid = p\n\n[wat]\n")
    with pytest.raises(corpus.ProblemError, match="unknown section"):
        corpus.load_problem(path)


def test_extended_errors_are_skipped(tmp_path, monkeypatch):
    path = tmp_path / "p.ini"
    path.write_text("[problem]\nid = p\ntier = extended\n\n[conditional]\nfield = fields/X1\n"
                    "equation = E\n\n[equation:E]\nlhs = u_x^2 + u_y\nsolved = u_y\n")
    rs = corpus.corpus_verify(corpus.load_problem(path))
    assert [r.status for r in rs] == ["SKIP"]
    assert rs[0].detail
