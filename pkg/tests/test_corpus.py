from __future__ import annotations

from dglab.corpus import CorpusSettings, corpus_csv, corpus_seeds, counterexample_suite, run_corpus
from dglab.io import dumps_json


def test_seeds_are_stable_and_distinct():
    a = corpus_seeds(20, 7)
    assert a == corpus_seeds(20, 7)
    assert len(set(a)) == 20 and all(0 <= s < 2**63 for s in a)
    assert corpus_seeds(5, 7) == a[:5]


def test_small_corpus_passes_and_is_reproducible():
    settings = CorpusSettings(n=3, seed=1, n_samples=40, h=1 / 32)
    a = run_corpus(settings)
    b = run_corpus(settings)
    assert a["all_pass"]
    assert dumps_json(a) == dumps_json(b)
    assert corpus_csv(a) == corpus_csv(b)
    assert len(corpus_csv(a).splitlines()) == 1 + 3 * 6


def test_threads_do_not_change_results():
    one = run_corpus(CorpusSettings(n=3, seed=2, n_samples=20, h=1 / 32))
    many = run_corpus(CorpusSettings(n=3, seed=2, n_samples=20, h=1 / 32, threads=3))
    assert dumps_json(one["fields"]) == dumps_json(many["fields"])


def test_counterexample_suite():
    res = counterexample_suite()
    assert res["ok"], [i for i in res["items"] if not i["ok"]]
    printed = [i for i in res["items"] if i["name"].startswith("ivl as-printed")]
    assert len(printed) == 3
    assert all((i["lhs"], i["rhs"], i["verdict"]) == (4.0, 0.0, "fail") for i in printed)
