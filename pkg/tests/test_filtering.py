import itertools

import pytest
from hypothesis import given, strategies as st

from dubpair.filtering import (
    SegmentRecord,
    filter_by_duration,
    filter_by_wer,
    normalize_text,
    wer,
)

from oracles import recursive_edit_distance


class TestNormalizeText:
    def test_punctuation_and_case(self):
        assert normalize_text("Hello, WORLD!") == ["hello", "world"]

    def test_intra_word_apostrophe_kept(self):
        assert normalize_text("don't stop") == ["don't", "stop"]

    def test_spanish_diacritics_preserved(self):
        assert normalize_text("¿Qué pasó?", "es") == ["qué", "pasó"]

    def test_typographic_apostrophe_normalized(self):
        assert normalize_text("don’t") == ["don't"]

    def test_surrounding_apostrophes_stripped(self):
        assert normalize_text("'quoted'") == ["quoted"]

    def test_compatibility_normalization(self):
        assert normalize_text("ﬁne") == ["fine"]  # ligature fi

    def test_empty_and_punctuation_only(self):
        assert normalize_text("") == []
        assert normalize_text("... !!") == []


class TestWer:
    def test_identity_zero(self):
        assert wer(["a", "b", "c"], ["a", "b", "c"]) == 0.0

    def test_all_deletions(self):
        assert wer(["a", "b", "c"], []) == 1.0

    def test_substitution_plus_insertion(self):
        assert wer(["a", "b", "c"], ["a", "x", "c", "d"]) == pytest.approx(2 / 3)

    def test_empty_reference_rejected(self):
        with pytest.raises(ValueError):
            wer([], ["a"])

    def test_exhaustive_oracle_short_sequences(self):
        alphabet = ("a", "b", "c")
        for ref_len in range(1, 4):
            for hyp_len in range(0, 4):
                for ref in itertools.product(alphabet, repeat=ref_len):
                    for hyp in itertools.product(alphabet, repeat=hyp_len):
                        expected = recursive_edit_distance(ref, hyp) / ref_len
                        assert wer(list(ref), list(hyp)) == expected

    @given(
        st.lists(st.sampled_from("abc"), min_size=1, max_size=6),
        st.lists(st.sampled_from("abc"), min_size=0, max_size=6),
    )
    def test_oracle_property(self, ref, hyp):
        expected = recursive_edit_distance(tuple(ref), tuple(hyp)) / len(ref)
        assert wer(ref, hyp) == expected

    @given(
        st.lists(st.sampled_from("abc"), min_size=1, max_size=6),
        st.lists(st.sampled_from("abc"), min_size=0, max_size=6),
    )
    def test_upper_bound(self, ref, hyp):
        assert wer(ref, hyp) <= max(1.0, len(hyp) / len(ref))


def seg(utterance_id, wer_value=None, duration_ms=4000):
    return SegmentRecord(
        utterance_id=utterance_id,
        title_id="t1",
        language="en",
        start_ms=0,
        end_ms=duration_ms,
        subtitle_text="text",
        asr_text="text" if wer_value is not None else None,
        wer=wer_value,
    )


class TestFilterByWer:
    def test_spec_example(self):
        segments = [seg(f"u{i}", w) for i, w in enumerate([0.1, 0.2, 0.5, 0.7, 0.3])]
        kept, dropped = filter_by_wer(segments)
        assert sorted(s.wer for s in kept) == [0.1, 0.2, 0.3]
        assert sorted(s.wer for s in dropped) == [0.5, 0.7]

    def test_all_zero_ties_break_by_id(self):
        segments = [seg(f"u{i}", 0.0) for i in range(5)]
        kept, _ = filter_by_wer(segments)
        assert [s.utterance_id for s in kept] == ["u0", "u1", "u2", "u3"]

    def test_empty_input(self):
        assert filter_by_wer([]) == ([], [])

    def test_missing_wer_rejected(self):
        with pytest.raises(ValueError, match="missing wer"):
            filter_by_wer([seg("u0", None)])

    def test_kept_is_prefix_of_sorted_survivors(self, rng):
        segments = [seg(f"u{i:03d}", float(rng.random())) for i in range(40)]
        kept, _ = filter_by_wer(segments, wer_max=0.6, keep_fraction=0.8)
        survivors = sorted(
            (s for s in segments if s.wer <= 0.6), key=lambda s: (s.wer, s.utterance_id)
        )
        expected_n = int(0.8 * len(survivors))
        assert kept == survivors[:expected_n]

    def test_keep_fraction_validated(self):
        with pytest.raises(ValueError):
            filter_by_wer([], keep_fraction=0.0)


class TestFilterByDuration:
    def test_boundaries_inclusive(self):
        segments = [
            seg("a", 0.0, 2999),
            seg("b", 0.0, 3000),
            seg("c", 0.0, 15000),
            seg("d", 0.0, 15001),
        ]
        kept, dropped = filter_by_duration(segments)
        assert [s.utterance_id for s in kept] == ["b", "c"]
        assert [s.utterance_id for s in dropped] == ["a", "d"]

    def test_empty_input(self):
        assert filter_by_duration([]) == ([], [])

    def test_partition(self, rng):
        segments = [
            seg(f"u{i}", 0.0, int(rng.integers(500, 20000))) for i in range(30)
        ]
        kept, dropped = filter_by_duration(segments)
        assert len(kept) + len(dropped) == len(segments)
        assert {s.utterance_id for s in kept} | {s.utterance_id for s in dropped} == {
            s.utterance_id for s in segments
        }
        assert not {s.utterance_id for s in kept} & {s.utterance_id for s in dropped}


class TestSegmentRecord:
    def test_duration_derived(self):
        assert seg("u", None, 2500).duration_s == 2.5

    def test_duration_mismatch_rejected(self):
        with pytest.raises(ValueError):
            SegmentRecord("u", "t", "en", 0, 1000, "x", duration_s=2.0)

    def test_wer_without_asr_rejected(self):
        with pytest.raises(ValueError):
            SegmentRecord("u", "t", "en", 0, 1000, "x", asr_text=None, wer=0.1)
