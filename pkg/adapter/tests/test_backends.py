import pytest

from ucorrect_adapter.backends import TinyMlmBackend, UniformBackend, load_backend
from ucorrect_adapter.protocol import Request


def make_request(request_id=1, tokens=("a", "b", "c"), mask_index=1, top_l=3, orig="b"):
    return Request(request_id, list(tokens), mask_index, top_l, orig)


class TestUniformBackend:
    def test_equal_probabilities(self):
        backend = UniformBackend(["d", "a", "c", "b"])
        ((prob_orig, top),) = backend.score_batch([make_request(top_l=4)])
        assert prob_orig == 0.25
        assert top == [("a", 0.25), ("b", 0.25), ("c", 0.25), ("d", 0.25)]

    def test_top_l_zero(self):
        backend = UniformBackend(["a", "b"])
        ((_, top),) = backend.score_batch([make_request(top_l=0)])
        assert top == []

    def test_from_file(self, tmp_path):
        path = tmp_path / "vocab.txt"
        path.write_text("b\na\n\nb\n", encoding="utf-8")
        backend = UniformBackend.from_file(path)
        assert backend.vocab == ["a", "b"]


class TestTinyBackend:
    def test_probabilities_in_contract_range(self):
        backend = TinyMlmBackend(list("abcd"), window=2, dim=8)
        requests = [
            make_request(1, ("a", "b", "c", "d"), 2, 4, "c"),
            make_request(2, ("d",), 0, 2, "d"),
        ]
        for prob_orig, top in backend.score_batch(requests):
            assert 0.0 < prob_orig <= 1.0
            assert all(0.0 < p <= 1.0 for _, p in top)
            assert top == sorted(top, key=lambda kv: (-kv[1], kv[0]))

    def test_unknown_orig_gets_floor_probability(self):
        backend = TinyMlmBackend(list("ab"), window=1, dim=4)
        ((prob_orig, _),) = backend.score_batch([make_request(1, ("a", "b"), 0, 0, "z")])
        assert prob_orig == pytest.approx(1e-12)

    def test_save_load_roundtrip(self, tmp_path):
        backend = TinyMlmBackend(list("abcd"), window=2, dim=8)
        backend.save(tmp_path / "model")
        loaded = TinyMlmBackend.load(tmp_path / "model")
        request = make_request(1, ("a", "b", "c"), 1, 4, "b")
        assert loaded.score_batch([request]) == backend.score_batch([request])

    def test_load_rejects_other_directories(self, tmp_path):
        (tmp_path / "config.json").write_text('{"type":"other"}', encoding="utf-8")
        with pytest.raises(ValueError):
            TinyMlmBackend.load(tmp_path)


class TestLoadBackend:
    def test_uniform_identifier(self, tmp_path):
        path = tmp_path / "vocab.txt"
        path.write_text("a\nb\n", encoding="utf-8")
        backend = load_backend(f"uniform:{path}")
        assert isinstance(backend, UniformBackend)

    def test_unknown_identifier(self):
        with pytest.raises(ValueError):
            load_backend("magic:whatever")
