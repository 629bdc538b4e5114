import random

import pytest

from ucorrect_adapter.backends import TinyMlmBackend
from ucorrect_adapter.finetune import finetune_tiny, mask_positions
from ucorrect_adapter.protocol import Request


class TestMaskPositions:
    def test_twenty_percent_of_ten_is_two(self):
        rng = random.Random(0)
        assert len(mask_positions(10, 0.20, rng)) == 2

    def test_minimum_one_position(self):
        rng = random.Random(0)
        assert len(mask_positions(3, 0.20, rng)) == 1

    def test_floor_rule(self):
        rng = random.Random(0)
        assert len(mask_positions(9, 0.20, rng)) == 1
        assert len(mask_positions(14, 0.20, rng)) == 2
        assert len(mask_positions(15, 0.20, rng)) == 3

    def test_seed_fixes_positions(self):
        first = mask_positions(50, 0.20, random.Random(7))
        second = mask_positions(50, 0.20, random.Random(7))
        assert first == second
        assert len(set(first)) == len(first)


def mean_prob_orig(backend: TinyMlmBackend, sentences: list[str]) -> float:
    requests = []
    rid = 0
    for sentence in sentences:
        for position, char in enumerate(sentence):
            rid += 1
            requests.append(Request(rid, list(sentence), position, 0, char))
    results = backend.score_batch(requests)
    return sum(p for p, _ in results) / len(results)


class TestFinetuneTiny:
    def test_artifacts_load_and_improve_domain_probability(self, tmp_path):
        # Domain sentences share rigid local structure the fresh model
        # cannot know; fine-tuning must raise held-out prob_orig.
        patterns = ["abcabc", "bcabca", "cabcab", "abcbca"]
        corpus = tmp_path / "domain.txt"
        corpus.write_text("".join(s + "\n" for s in patterns * 10), encoding="utf-8")

        before = TinyMlmBackend(list("abc"), window=3, dim=16)
        held_out = ["abcabc", "cabcab"]
        baseline = mean_prob_orig(before, held_out)

        base_dir = tmp_path / "base"
        before.save(base_dir)
        tuned = finetune_tiny(
            corpus, tmp_path / "tuned", base_dir=base_dir, seed=11, epochs=60
        )
        assert mean_prob_orig(tuned, held_out) >= baseline

        reloaded = TinyMlmBackend.load(tmp_path / "tuned")
        request = Request(1, list("abcabc"), 3, 2, "a")
        assert reloaded.score_batch([request]) == tuned.score_batch([request])

    def test_fresh_model_without_base(self, tmp_path):
        corpus = tmp_path / "domain.txt"
        corpus.write_text("aabb\nbbaa\n", encoding="utf-8")
        backend = finetune_tiny(corpus, tmp_path / "out", seed=3, epochs=5)
        assert set(backend.itos[2:]) == {"a", "b"}
        assert (tmp_path / "out" / "weights.pt").exists()

    def test_deterministic_given_seed(self, tmp_path):
        corpus = tmp_path / "domain.txt"
        corpus.write_text("abab\nbaba\n", encoding="utf-8")
        one = finetune_tiny(corpus, tmp_path / "m1", seed=5, epochs=10)
        two = finetune_tiny(corpus, tmp_path / "m2", seed=5, epochs=10)
        request = Request(1, list("abab"), 1, 2, "b")
        assert one.score_batch([request]) == two.score_batch([request])

    def test_invalid_mask_ratio(self, tmp_path):
        corpus = tmp_path / "domain.txt"
        corpus.write_text("ab\n", encoding="utf-8")
        with pytest.raises(ValueError):
            finetune_tiny(corpus, tmp_path / "out", mask_ratio=0.0)

    def test_empty_corpus(self, tmp_path):
        corpus = tmp_path / "empty.txt"
        corpus.write_text("\n\n", encoding="utf-8")
        with pytest.raises(ValueError):
            finetune_tiny(corpus, tmp_path / "out")
