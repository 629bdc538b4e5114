"""Scorer backends: what actually answers a masked-token query.

Three flavors behind one interface:

  uniform:VOCAB.txt   equal probability for every vocab token (stub/testing)
  tiny:DIR            small trainable torch MLM over windowed contexts
  hf:NAME_OR_PATH     a transformers fill-mask model (loaded lazily)

All backends return probabilities in (0, 1] and top lists sorted by
descending probability with code-point tie-breaks, as the protocol
requires.
"""

from __future__ import annotations

import json
from pathlib import Path

from .protocol import Request

# Probabilities of zero are outside the protocol contract; clamp instead.
MIN_PROB = 1e-12

TINY_FORMAT_VERSION = 1
PAD_TOKEN = "<pad>"
UNK_TOKEN = "<unk>"


def _top_from_dist(dist: dict[str, float], top_l: int) -> list[tuple[str, float]]:
    ranked = sorted(dist.items(), key=lambda kv: (-kv[1], kv[0]))
    return [(text, prob) for text, prob in ranked[:top_l]]


class UniformBackend:
    """Every vocab token is equally likely; the reference stub."""

    def __init__(self, vocab: list[str]):
        if not vocab:
            raise ValueError("uniform backend needs a non-empty vocabulary")
        self.vocab = sorted(set(vocab))

    @classmethod
    def from_file(cls, path: str | Path) -> "UniformBackend":
        with open(path, encoding="utf-8") as handle:
            return cls([line.strip() for line in handle if line.strip()])

    def score_batch(self, requests: list[Request]):
        prob = 1.0 / len(self.vocab)
        results = []
        for request in requests:
            top = [(text, prob) for text in self.vocab[: request.top_l]]
            results.append((prob, top))
        return results


class TinyMlmBackend:
    """Windowed-context masked token model, small enough to train in tests.

    The model embeds the tokens around the masked slot (window per side,
    boundary-padded) and predicts the missing token with an MLP; exactly
    the masked-token objective at reduced scale. Artifacts live in a
    directory: config.json plus weights.pt.
    """

    def __init__(self, vocab: list[str], window: int = 3, dim: int = 32, device: str = "cpu"):
        import torch

        self.torch = torch
        self.window = window
        self.dim = dim
        self.device = device
        self.itos = [PAD_TOKEN, UNK_TOKEN] + sorted(set(vocab) - {PAD_TOKEN, UNK_TOKEN})
        self.stoi = {t: i for i, t in enumerate(self.itos)}
        self.model = self._build()

    def _build(self):
        torch = self.torch
        vocab_size = len(self.itos)
        model = torch.nn.Sequential(
            torch.nn.Flatten(),
            torch.nn.Linear(2 * self.window * self.dim, 2 * self.dim),
            torch.nn.GELU(),
            torch.nn.Linear(2 * self.dim, vocab_size),
        )
        embedding = torch.nn.Embedding(vocab_size, self.dim)
        full = torch.nn.ModuleDict({"embed": embedding, "head": model})
        full.to(self.device)
        return full

    def _context_ids(self, tokens: list[str], mask_index: int) -> list[int]:
        ids = []
        for offset in range(-self.window, self.window + 1):
            if offset == 0:
                continue
            j = mask_index + offset
            if 0 <= j < len(tokens):
                ids.append(self.stoi.get(tokens[j], self.stoi[UNK_TOKEN]))
            else:
                ids.append(self.stoi[PAD_TOKEN])
        return ids

    def logits(self, contexts):
        embedded = self.model["embed"](contexts)
        return self.model["head"](embedded)

    def _distributions(self, batch: list[tuple[list[str], int]]):
        torch = self.torch
        contexts = torch.tensor(
            [self._context_ids(tokens, i) for tokens, i in batch],
            dtype=torch.long,
            device=self.device,
        )
        with torch.no_grad():
            probs = torch.softmax(self.logits(contexts), dim=-1)
        return probs.cpu()

    def score_batch(self, requests: list[Request]):
        probs = self._distributions([(r.tokens, r.mask_index) for r in requests])
        results = []
        for row, request in zip(probs, requests):
            dist = {
                text: max(float(row[i]), MIN_PROB)
                for i, text in enumerate(self.itos)
                if text not in (PAD_TOKEN, UNK_TOKEN)
            }
            orig_prob = dist.get(request.orig, MIN_PROB)
            results.append((min(orig_prob, 1.0), _top_from_dist(dist, request.top_l)))
        return results

    def save(self, outdir: str | Path) -> None:
        outdir = Path(outdir)
        outdir.mkdir(parents=True, exist_ok=True)
        config = {
            "type": "tiny",
            "version": TINY_FORMAT_VERSION,
            "window": self.window,
            "dim": self.dim,
            "vocab": self.itos[2:],
        }
        with open(outdir / "config.json", "w", encoding="utf-8") as handle:
            json.dump(config, handle, ensure_ascii=False, indent=2)
        self.torch.save(self.model.state_dict(), outdir / "weights.pt")

    @classmethod
    def load(cls, indir: str | Path, device: str = "cpu") -> "TinyMlmBackend":
        import torch

        indir = Path(indir)
        with open(indir / "config.json", encoding="utf-8") as handle:
            config = json.load(handle)
        if config.get("type") != "tiny" or config.get("version") != TINY_FORMAT_VERSION:
            raise ValueError(f"not a tiny model directory: {indir}")
        backend = cls(
            config["vocab"], window=config["window"], dim=config["dim"], device=device
        )
        state = torch.load(indir / "weights.pt", map_location=device, weights_only=True)
        backend.model.load_state_dict(state)
        backend.model.eval()
        return backend


class HfBackend:
    """transformers masked-LM backend; heavyweight, imported only if used."""

    def __init__(self, model_id: str, device: str = "cpu", max_length: int = 512):
        from transformers import AutoModelForMaskedLM, AutoTokenizer
        import torch

        self.torch = torch
        self.device = device
        self.max_length = max_length
        self.tokenizer = AutoTokenizer.from_pretrained(model_id)
        self.model = AutoModelForMaskedLM.from_pretrained(model_id).to(device)
        self.model.eval()

    def _mask_logits(self, tokens: list[str], mask_index: int):
        torch = self.torch
        pieces = list(tokens)
        pieces[mask_index] = self.tokenizer.mask_token
        encoded = self.tokenizer(
            "".join(pieces),
            return_tensors="pt",
            truncation=True,
            max_length=self.max_length,
        ).to(self.device)
        mask_positions = (
            encoded["input_ids"][0] == self.tokenizer.mask_token_id
        ).nonzero(as_tuple=True)[0]
        if len(mask_positions) != 1:
            raise ValueError("input must tokenize to exactly one mask position")
        with torch.no_grad():
            logits = self.model(**encoded).logits[0, mask_positions[0]]
        return torch.softmax(logits, dim=-1)

    def score_batch(self, requests: list[Request]):
        results = []
        for request in requests:
            probs = self._mask_logits(request.tokens, request.mask_index)
            orig_ids = self.tokenizer.convert_tokens_to_ids([request.orig])
            orig_prob = MIN_PROB
            if orig_ids and orig_ids[0] != self.tokenizer.unk_token_id:
                orig_prob = max(float(probs[orig_ids[0]]), MIN_PROB)
            values, indices = probs.topk(min(request.top_l, probs.shape[-1]))
            top = []
            for value, index in zip(values.tolist(), indices.tolist()):
                text = self.tokenizer.convert_ids_to_tokens(index)
                top.append((text, max(min(value, 1.0), MIN_PROB)))
            top.sort(key=lambda kv: (-kv[1], kv[0]))
            results.append((min(orig_prob, 1.0), top[: request.top_l]))
        return results


def load_backend(identifier: str, device: str = "cpu"):
    """Backend from an identifier like uniform:vocab.txt, tiny:dir, hf:name."""
    kind, _, rest = identifier.partition(":")
    if kind == "uniform":
        return UniformBackend.from_file(rest)
    if kind == "tiny":
        return TinyMlmBackend.load(rest, device=device)
    if kind == "hf":
        return HfBackend(rest, device=device)
    raise ValueError(f"unknown backend identifier {identifier!r} "
                     "(expected uniform:, tiny:, or hf:)")
