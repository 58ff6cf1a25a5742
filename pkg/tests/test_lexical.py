import json
import math
import random

import pytest

from paraeval.lexical import (
    corpus_bleu,
    levenshtein,
    nld,
    rouge_l,
    sentence_bleu,
)
from paraeval.textnorm import tokenize_13a

from conftest import FIXTURES


def load_corpus_fixture():
    pairs = []
    with open(FIXTURES / "bleu_corpus_cases.jsonl", encoding="utf-8") as f:
        for line in f:
            pairs.append(json.loads(line))
    with open(FIXTURES / "bleu_corpus_golden.json", encoding="utf-8") as f:
        golden = json.load(f)
    return pairs, golden


def load_sentence_fixture():
    with open(FIXTURES / "bleu_sentence_cases.jsonl", encoding="utf-8") as f:
        return [json.loads(line) for line in f]


def to_pairs(records):
    return [
        (tokenize_13a(rec["hyp"]), [tokenize_13a(r) for r in rec["refs"]]) for rec in records
    ]


class TestLevenshtein:
    def test_kitten_sitting(self):
        assert levenshtein("kitten", "sitting") == 3

    def test_identity(self):
        assert levenshtein("same string", "same string") == 0

    def test_insertions_only(self):
        assert levenshtein("", "abc") == 3

    def test_nld_examples(self):
        assert nld("kitten", "sitting") == pytest.approx(3 / 7)
        assert nld("x", "x") == 0.0
        assert nld("a", "xyz") == 1.0
        assert nld("", "") == 0.0

    def test_nld_bounds_random(self):
        rng = random.Random(42)
        for _ in range(200):
            a = "".join(rng.choice("abcd ") for _ in range(rng.randint(0, 20)))
            b = "".join(rng.choice("abcd ") for _ in range(rng.randint(0, 20)))
            value = nld(a, b)
            assert 0.0 <= value <= 1.0
            if a and a == b:
                assert value == 0.0

    def test_nld_zero_iff_equal_nonempty(self):
        assert nld("abc", "abd") > 0.0

    def test_nld_uses_nfc(self):
        assert nld("café", "café") == 0.0


class TestSentenceBleu:
    def test_perfect_match_is_100(self):
        seq = tokenize_13a("A perfectly matched sentence here.")
        assert sentence_bleu(seq, [seq]).bleu4 == pytest.approx(100.0)

    def test_bp_formula_short_hypothesis(self):
        hyp = tokenize_13a("alpha beta gamma")
        ref = tokenize_13a("alpha beta gamma delta epsilon zeta")
        result = sentence_bleu(hyp, [ref])
        assert result.brevity_penalty == pytest.approx(math.exp(1 - 6 / 3))

    def test_empty_hypothesis_all_zero(self):
        result = sentence_bleu(tokenize_13a(""), [tokenize_13a("some reference")])
        assert result.bleu_n == (0.0, 0.0, 0.0, 0.0)
        assert result.brevity_penalty == 0.0

    def test_no_unigram_overlap_scores_zero(self):
        result = sentence_bleu(tokenize_13a("aaa bbb ccc ddd"), [tokenize_13a("eee fff ggg hhh")])
        assert result.bleu4 == 0.0

    def test_requires_reference(self):
        with pytest.raises(ValueError):
            sentence_bleu(tokenize_13a("a"), [])

    @pytest.mark.parametrize("rec", load_sentence_fixture(), ids=lambda r: r["hyp"][:24])
    def test_matches_reference_scorer(self, rec):
        result = sentence_bleu(tokenize_13a(rec["hyp"]), [tokenize_13a(rec["ref"])])
        expected = rec["expected"]
        for mine, golden in zip(result.bleu_n, expected["bleu"]):
            assert mine == pytest.approx(golden, abs=0.01)
        for mine, golden in zip(result.precisions, expected["precisions"]):
            assert mine == pytest.approx(golden, abs=1e-9)
        assert result.brevity_penalty == pytest.approx(expected["bp"], abs=1e-9)
        assert result.hyp_len == expected["hyp_len"]
        assert result.ref_len == expected["ref_len"]

    def test_identical_single_reference_unit_precisions(self):
        seq = tokenize_13a("every token matches exactly here")
        result = sentence_bleu(seq, [seq])
        assert result.precisions == (1.0, 1.0, 1.0, 1.0)
        assert result.brevity_penalty == 1.0

    def test_adding_reference_never_lowers_precisions(self):
        rng = random.Random(3)
        vocab = "red blue green lamp chair door window floor".split()
        for _ in range(100):
            hyp = tokenize_13a(" ".join(rng.choices(vocab, k=rng.randint(1, 10))))
            ref1 = tokenize_13a(" ".join(rng.choices(vocab, k=rng.randint(1, 10))))
            ref2 = tokenize_13a(" ".join(rng.choices(vocab, k=rng.randint(1, 10))))
            one = sentence_bleu(hyp, [ref1])
            two = sentence_bleu(hyp, [ref1, ref2])
            for p1, p2 in zip(one.precisions, two.precisions):
                assert p2 >= p1 - 1e-12


class TestCorpusBleu:
    def test_all_perfect_pairs(self):
        pairs = [
            (tokenize_13a(s), [tokenize_13a(s)])
            for s in ("First sample sentence.", "Second one here.", "Third sentence arrives.")
        ]
        result = corpus_bleu(pairs)
        assert all(b == pytest.approx(100.0) for b in result.bleu_n)

    def test_matches_reference_scorer_on_fixture(self):
        records, golden = load_corpus_fixture()
        result = corpus_bleu(to_pairs(records))
        for mine, expected in zip(result.bleu_n, golden["bleu"]):
            assert mine == pytest.approx(expected, abs=0.01)
        for mine, expected in zip(result.precisions, golden["precisions"]):
            assert mine == pytest.approx(expected, abs=1e-9)
        assert result.brevity_penalty == pytest.approx(golden["bp"], abs=1e-9)
        assert result.hyp_len == golden["hyp_len"]
        assert result.ref_len == golden["ref_len"]

    def test_pair_order_invariance(self):
        records, _ = load_corpus_fixture()
        pairs = to_pairs(records)
        shuffled = list(pairs)
        random.Random(11).shuffle(shuffled)
        assert corpus_bleu(pairs) == corpus_bleu(shuffled)

    def test_duplicate_references_change_nothing(self):
        records, _ = load_corpus_fixture()
        pairs = [(hyp, refs + refs) for hyp, refs in to_pairs(records)]
        assert corpus_bleu(pairs) == corpus_bleu(to_pairs(records))

    def test_empty_corpus_is_an_error(self):
        with pytest.raises(ValueError):
            corpus_bleu([])

    def test_zero_match_order_yields_zero(self):
        # bigrams never match: no smoothing at corpus level
        pairs = [
            (tokenize_13a("a x b y c"), [tokenize_13a("a q b r c")]),
            (tokenize_13a("d x e y f"), [tokenize_13a("d q e r f")]),
        ]
        result = corpus_bleu(pairs)
        assert result.bleu_n[0] > 0
        assert result.bleu_n[1] == 0.0
        assert result.bleu_n[3] == 0.0


class TestRougeL:
    def test_identical(self):
        seq = tokenize_13a("a full sentence match")
        assert rouge_l(seq, seq).f == pytest.approx(1.0)

    def test_hand_case(self):
        got = rouge_l(tokenize_13a("a c e"), tokenize_13a("a b c d e"))
        assert got.precision == pytest.approx(1.0)
        assert got.recall == pytest.approx(0.6)
        assert got.f == pytest.approx(0.75)

    def test_disjoint(self):
        assert rouge_l(tokenize_13a("one two"), tokenize_13a("three four")).f == 0.0

    def test_empty_side(self):
        got = rouge_l(tokenize_13a(""), tokenize_13a("anything"))
        assert (got.precision, got.recall, got.f) == (0.0, 0.0, 0.0)

    def test_f_is_harmonic_mean(self):
        got = rouge_l(tokenize_13a("a b x y"), tokenize_13a("a b z"))
        p, r = got.precision, got.recall
        assert got.f == pytest.approx(2 * p * r / (p + r))
