import random

import pytest

from paraeval.data import ParaphraseSet, Utterance
from paraeval.parascore import (
    DistributionSummary,
    ParaScoreConfig,
    combine,
    filter_threshold,
    parascore,
    score_set,
    summarize,
    write_distribution_csv,
)

CFG = ParaScoreConfig()


class TestCombine:
    def test_identity_pair_value(self):
        # f1 = 1, divergence 0: (1 + 0.5 * 0) / 1.175
        assert combine(1.0, 0.0, CFG) == pytest.approx(0.851064, abs=1e-6)

    def test_capped_divergence(self):
        assert combine(0.9, 0.5, CFG) == pytest.approx(0.914894, abs=1e-6)

    def test_uncapped_divergence(self):
        assert combine(0.9, 0.2, CFG) == pytest.approx(0.851064, abs=1e-6)

    def test_default_denominator_exact(self):
        assert CFG.denominator == pytest.approx(1.175, abs=0.0)

    def test_cap_saturation_exact(self):
        rng = random.Random(2024)
        for _ in range(1000):
            f1_a, f1_b = rng.uniform(0, 1), rng.uniform(0, 1)
            nld_a = rng.uniform(CFG.gamma, 1.0)
            nld_b = rng.uniform(CFG.gamma, 1.0)
            score_a = combine(f1_a, nld_a, CFG)
            score_b = combine(f1_b, nld_b, CFG)
            # above the cap the divergence value is irrelevant, bit for bit
            assert score_a == combine(f1_a, CFG.gamma, CFG)
            assert score_b == combine(f1_b, CFG.gamma, CFG)
            assert score_a - score_b == pytest.approx((f1_a - f1_b) / 1.175, abs=1e-12)

    def test_monotone_in_divergence_below_cap(self):
        rng = random.Random(7)
        for _ in range(200):
            f1 = rng.uniform(0, 1)
            lo = rng.uniform(0, CFG.gamma)
            hi = rng.uniform(lo, CFG.gamma)
            assert combine(f1, hi, CFG) >= combine(f1, lo, CFG)

    def test_config_validation(self):
        with pytest.raises(ValueError):
            ParaScoreConfig(gamma=0.0)
        with pytest.raises(ValueError):
            ParaScoreConfig(omega=-0.1)
        with pytest.raises(ValueError):
            ParaScoreConfig(threshold=1.5)


class TestParascore:
    def test_identical_pair(self, hash_provider):
        text = "the quick brown fox jumps"
        score = parascore(text, text, CFG, hash_provider)
        assert score.parascore == pytest.approx(0.851064, abs=1e-6)
        assert score.bertscore_f1 == pytest.approx(1.0, abs=1e-9)
        assert score.nld == 0.0

    def test_components_recombine(self, hash_provider):
        score = parascore("the cat sat down", "a cat sat down quietly", CFG, hash_provider)
        assert score.parascore == pytest.approx(
            combine(score.bertscore_f1, score.nld, CFG), abs=1e-9
        )

    def test_empty_input_rejected(self, hash_provider):
        with pytest.raises(ValueError):
            parascore("", "something", CFG, hash_provider)


def make_set(variants, status="complete", scores=None):
    return ParaphraseSet(
        utterance_id="u0",
        variants=tuple(variants),
        generator="g",
        strategy="sequential",
        status=status,
        scores=scores,
    )


UTT = Utterance(id="u0", video_id="v", index_in_video=0, text="the quick brown fox jumps")


class TestScoreSet:
    def test_identical_variants(self, hash_provider):
        ps = make_set([UTT.text] * 5)
        scored = score_set(UTT, ps, CFG, hash_provider)
        assert len(scored.scores) == 5
        for s in scored.scores:
            assert s.parascore == pytest.approx(0.851064, abs=1e-6)
        assert scored.mean_parascore == pytest.approx(0.851064, abs=1e-6)

    def test_missing_set_rejected(self, hash_provider):
        with pytest.raises(ValueError, match="not complete"):
            score_set(UTT, make_set([], status="missing"), CFG, hash_provider)

    def test_mean_is_arithmetic_mean(self, hash_provider):
        variants = [
            "a quick brown fox leaps",
            "the swift brown fox jumps",
            "a fox jumps very quickly",
            "quick foxes jump over things",
            "the quick brown fox jumps",
        ]
        scored = score_set(UTT, make_set(variants), CFG, hash_provider)
        mean = sum(s.parascore for s in scored.scores) / 5
        assert scored.mean_parascore == pytest.approx(mean, abs=1e-12)

    def test_permutation_permutes_scores(self, hash_provider):
        variants = [
            "a quick brown fox leaps",
            "the swift brown fox jumps",
            "a fox jumps very quickly",
        ]
        scored = score_set(UTT, make_set(variants), CFG, hash_provider)
        permuted = score_set(UTT, make_set(variants[::-1]), CFG, hash_provider)
        assert list(permuted.scores) == list(scored.scores)[::-1]

    def test_failure_names_variant_index(self, hash_provider):
        variants = ["fine variant number one", "", "fine variant number three"]
        with pytest.raises(Exception, match="variant 1"):
            score_set(UTT, make_set(variants), CFG, hash_provider)


class TestFilterThreshold:
    def scored(self):
        from paraeval.data import VariantScore

        parascores = [0.71, 0.70, 0.69, 0.8, 0.2]
        return make_set(
            [f"variant number {i} here" for i in range(5)],
            scores=tuple(VariantScore(p, p, 0.2) for p in parascores),
        )

    def test_inclusive_boundary(self):
        kept = filter_threshold(self.scored(), 0.7)
        assert [i for i, _ in kept] == [0, 1, 3]

    def test_zero_keeps_all(self):
        assert len(filter_threshold(self.scored(), 0.0)) == 5

    def test_above_one_keeps_none(self):
        assert filter_threshold(self.scored(), 1.01) == []

    def test_unscored_rejected(self):
        with pytest.raises(ValueError, match="unscored"):
            filter_threshold(make_set(["a b c d"]), 0.7)


class TestSummarize:
    def test_constant_scores(self):
        summary = summarize([0.5, 0.5, 0.5])
        assert summary.mean == 0.5
        assert summary.std == 0.0
        assert summary.count == 3
        assert len(summary.histogram) == 1
        assert summary.histogram[0][2] == 3

    def test_two_bins(self):
        summary = summarize([0.0, 1.0], bin_width=0.5)
        assert [c for _, _, c in summary.histogram] == [1, 1]
        assert summary.mean == 0.5

    def test_uniform_grid_median(self):
        values = [i / 999 for i in range(1000)]
        summary = summarize(values, bin_width=0.02)
        assert summary.percentiles[0.50] == pytest.approx(0.5, abs=0.02)
        assert summary.percentiles[0.25] <= summary.percentiles[0.50] <= summary.percentiles[0.75]

    def test_histogram_counts_sum_to_count(self):
        rng = random.Random(1)
        values = [rng.random() for _ in range(257)]
        summary = summarize(values, bin_width=0.02)
        assert sum(c for _, _, c in summary.histogram) == summary.count == 257

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            summarize([])

    def test_csv_export(self, tmp_path):
        summary = summarize([0.1, 0.2, 0.3, 0.4], bin_width=0.1)
        path = tmp_path / "dist.csv"
        write_distribution_csv(summary, path)
        lines = path.read_text().strip().split("\n")
        assert lines[0] == "bin_start,bin_end,count"
        assert "mean,std,p25,p50,p75,count" in lines
        summary_line = lines[lines.index("mean,std,p25,p50,p75,count") + 1]
        assert summary_line.endswith(",4")
