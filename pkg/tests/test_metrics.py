import pytest
from hypothesis import given, strategies as st

from dubpair.metrics import (
    RatingSheet,
    aggregate_ratings,
    bleu,
    corpus_stats,
    load_rating_sheets,
    render_stats_table,
)

from oracles import brute_force_stats


class TestBleu:
    def test_identical_corpus_is_100(self):
        corpus = [["the", "cat"], ["a", "dog", "barks"]]
        assert bleu(corpus, corpus) == 100.0

    def test_disjoint_vocabulary_is_0(self):
        assert bleu([["x", "y"]], [["a", "b"]]) == 0.0

    def test_hand_computed_example(self):
        hyp = ["the cat sat on the mat".split()]
        ref = ["the cat sat on a mat".split()]
        expected = 100.0 * (5 / 6 * 3 / 5 * 1 / 2 * 1 / 3) ** 0.25
        assert bleu(hyp, ref) == pytest.approx(expected, abs=1e-9)

    def test_brevity_penalty_applied(self):
        import math

        hyp = [["the", "cat", "sat", "on"]]
        ref = [["the", "cat", "sat", "on", "a", "mat"]]
        # All n-gram precisions are 1; only brevity remains.
        assert bleu(hyp, ref) == pytest.approx(100.0 * math.exp(1 - 6 / 4), abs=1e-9)

    def test_permutation_invariance(self):
        hyps = [["a", "b", "c", "d"], ["x", "y", "z", "w"], ["m", "n", "o", "p"]]
        refs = [["a", "b", "c", "e"], ["x", "q", "z", "w"], ["m", "n", "r", "p"]]
        forward = bleu(hyps, refs)
        perm = [2, 0, 1]
        assert bleu([hyps[i] for i in perm], [refs[i] for i in perm]) == pytest.approx(
            forward, abs=1e-12
        )

    def test_length_mismatch_rejected(self):
        with pytest.raises(ValueError):
            bleu([["a"]], [["a"], ["b"]])

    def test_empty_reference_rejected(self):
        with pytest.raises(ValueError):
            bleu([["a"]], [[]])

    def test_smoothing_flag_rescues_zero_precision(self):
        hyp = [["a", "b"]]
        ref = [["a", "c"]]
        assert bleu(hyp, ref) == 0.0
        assert bleu(hyp, ref, smooth_eps=1e-9) > 0.0

    @given(
        st.lists(
            st.lists(st.sampled_from("abcd"), min_size=1, max_size=8),
            min_size=1,
            max_size=5,
        )
    )
    def test_range_on_random_corpora(self, refs):
        hyps = [list(reversed(r)) for r in refs]
        score = bleu(hyps, refs)
        assert 0.0 <= score <= 100.0


class TestCorpusStats:
    def test_two_point_example(self):
        stats = corpus_stats([1.0, 3.0])
        assert (stats.count, stats.min_s, stats.max_s, stats.mean_s) == (2, 1.0, 3.0, 2.0)

    def test_histogram_counts_sum(self):
        stats = corpus_stats([0.5, 1.5, 1.7, 2.2, 9.9])
        assert sum(c for _, _, c in stats.histogram) == 5

    def test_max_on_bucket_edge_included(self):
        stats = corpus_stats([1.0, 3.0])
        assert stats.histogram[-1][2] >= 1

    def test_brute_force_oracle(self, rng):
        durations = [float(d) for d in rng.uniform(0.2, 30.0, size=1000)]
        stats = corpus_stats(durations)
        count, lo, hi, mean, histogram = brute_force_stats(durations)
        assert stats.count == count
        assert stats.min_s == lo
        assert stats.max_s == hi
        assert stats.mean_s == mean
        assert stats.histogram == histogram

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            corpus_stats([])

    def test_report_renders_figure_fields(self):
        stats = corpus_stats([0.833, 5.096, 244.250])
        table = render_stats_table(stats)
        for token in ("utterances", "min (s)", "max (s)", "mean (s)"):
            assert token in table


def sheet(item, rater, **scores):
    base = {"emotion": 3, "emphasis": 3, "intonation": 3, "rhythm": 3}
    base.update(scores)
    return RatingSheet(item, rater, base)


class TestAggregateRatings:
    def test_constant_scores(self):
        sheets = [sheet(f"i{i}", f"r{j}", emotion=4, emphasis=4, intonation=4, rhythm=4)
                  for i in range(2) for j in range(3)]
        summary = aggregate_ratings(sheets)
        assert all(v == 4.0 for v in summary.overall.values())

    def test_simple_mean(self):
        sheets = [sheet("i0", f"r{j}", emotion=s) for j, s in enumerate((3, 4, 5))]
        summary = aggregate_ratings(sheets)
        assert summary.overall["emotion"] == 4.0

    def test_per_item_means(self):
        sheets = [sheet("i0", "r0", emotion=5), sheet("i1", "r0", emotion=1)]
        summary = aggregate_ratings(sheets)
        assert summary.per_item["i0"]["emotion"] == 5.0
        assert summary.per_item["i1"]["emotion"] == 1.0

    def test_means_within_scale(self, rng):
        sheets = [
            sheet(
                f"i{i % 4}",
                f"r{i}",
                emotion=int(rng.integers(1, 6)),
                emphasis=int(rng.integers(1, 6)),
                intonation=int(rng.integers(1, 6)),
                rhythm=int(rng.integers(1, 6)),
            )
            for i in range(40)
        ]
        summary = aggregate_ratings(sheets)
        assert all(1.0 <= v <= 5.0 for v in summary.overall.values())

    def test_duplicate_sheet_rejected(self):
        with pytest.raises(ValueError, match="duplicate"):
            aggregate_ratings([sheet("i0", "r0"), sheet("i0", "r0")])

    def test_out_of_range_score_rejected(self):
        with pytest.raises(ValueError):
            sheet("i0", "r0", emotion=6)

    def test_missing_aspect_rejected(self):
        with pytest.raises(ValueError):
            RatingSheet("i0", "r0", {"emotion": 3})


class TestRatingsFile:
    def test_load_with_header(self, tmp_path):
        path = tmp_path / "ratings.csv"
        path.write_text(
            "item_id,rater_id,emotion,emphasis,intonation,rhythm\n"
            "i0,r0,4,3,3,5\n"
            "i0,r1,2,4,3,3\n"
        )
        sheets = load_rating_sheets(path)
        assert len(sheets) == 2
        assert sheets[0].scores["rhythm"] == 5

    def test_load_duplicate_rejected(self, tmp_path):
        path = tmp_path / "ratings.csv"
        path.write_text("i0,r0,4,3,3,5\ni0,r0,4,3,3,5\n")
        with pytest.raises(ValueError, match="duplicate"):
            load_rating_sheets(path)

    def test_load_out_of_range_rejected(self, tmp_path):
        path = tmp_path / "ratings.csv"
        path.write_text("i0,r0,9,3,3,5\n")
        with pytest.raises(ValueError):
            load_rating_sheets(path)
