import itertools
import logging
import random

import pytest
from hypothesis import given, strategies as st

from ucorrect.corpus import Token
from ucorrect.errors import MalformedLine
from ucorrect.phonetics import (
    PhonemeTable,
    load_phoneme_table,
    similarity,
    to_phonemes,
)

from oracles import oracle_levenshtein


class TestLoadPhonemeTable:
    def test_basic_format(self, tmp_path):
        path = tmp_path / "table.tsv"
        path.write_text("妈\tma1\n吗\tma5\n", encoding="utf-8")
        table = load_phoneme_table(path)
        assert len(table) == 2
        assert table.get("妈") == "ma1"

    def test_comments_skipped(self, tmp_path):
        path = tmp_path / "table.tsv"
        path.write_text("# comment\n妈\tma1\n", encoding="utf-8")
        assert len(load_phoneme_table(path)) == 1

    def test_space_instead_of_tab(self, tmp_path):
        path = tmp_path / "table.tsv"
        path.write_text("妈 ma1\n", encoding="utf-8")
        with pytest.raises(MalformedLine) as excinfo:
            load_phoneme_table(path)
        assert excinfo.value.line_no == 1

    def test_duplicate_last_wins_with_warning(self, tmp_path, caplog):
        path = tmp_path / "table.tsv"
        path.write_text("x\tfoo\nx\tbar\n", encoding="utf-8")
        with caplog.at_level(logging.WARNING):
            table = load_phoneme_table(path)
        assert table.get("x") == "bar"
        assert any("duplicate" in rec.message for rec in caplog.records)


class TestBundledTables:
    def test_pinyin_table_resolves_by_name(self):
        from ucorrect.cli import _resolve_table

        table = _resolve_table("pinyin")
        assert table.get("妈") == "ma1"
        assert table.get("马") == "ma3"

    def test_latin_identity_table(self):
        from ucorrect.cli import _resolve_table

        table = _resolve_table("latin")
        assert table.get("a") == "a"
        assert table.get("Z") == "Z"


class TestToPhonemes:
    def test_table_hit(self, tmp_path):
        path = tmp_path / "table.tsv"
        path.write_text("妈\tma1\n", encoding="utf-8")
        table = load_phoneme_table(path)
        assert to_phonemes(table, Token(2, "妈")) == "ma1"

    def test_miss_falls_back_to_text(self):
        assert to_phonemes(PhonemeTable(), Token(2, "x")) == "x"

    def test_sentinel_falls_back_too(self):
        assert to_phonemes(PhonemeTable(), Token(0, "[MASK]")) == "[MASK]"


class TestSimilarity:
    def test_identity(self):
        assert similarity("ma1", "ma1") == 1.0

    def test_one_of_three(self):
        assert similarity("ma1", "ma3") == pytest.approx(1 - 1 / 3, abs=1e-9)

    def test_against_empty(self):
        assert similarity("", "ma1") == 0.0

    def test_both_empty(self):
        assert similarity("", "") == 1.0

    def test_exhaustive_symmetry_short_strings(self):
        pool = [
            "".join(p)
            for length in range(0, 4)
            for p in itertools.product("abc", repeat=length)
        ]
        for a in pool:
            for b in pool:
                assert similarity(a, b) == similarity(b, a)

    @given(
        st.text(alphabet="abc", max_size=8),
        st.text(alphabet="abc", max_size=8),
    )
    def test_symmetry_and_bounds(self, a, b):
        value = similarity(a, b)
        assert value == similarity(b, a)
        assert 0.0 <= value <= 1.0
        assert (value == 1.0) == (a == b)

    def test_thousand_random_pairs_match_recursive_oracle(self):
        rng = random.Random(1234)
        alphabet = "abc"
        for _ in range(1000):
            a = "".join(rng.choice(alphabet) for _ in range(rng.randint(0, 8)))
            b = "".join(rng.choice(alphabet) for _ in range(rng.randint(0, 8)))
            if not a and not b:
                expected = 1.0
            else:
                expected = 1.0 - oracle_levenshtein(a, b) / max(len(a), len(b))
            assert similarity(a, b) == pytest.approx(expected, abs=1e-12)
