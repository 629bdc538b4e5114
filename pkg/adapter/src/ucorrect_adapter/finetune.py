"""Masked-LM fine-tuning on ground-truth text.

Per sequence, floor(mask_ratio * n) positions (at least one) are selected
uniformly at random with a seeded generator and the model is trained to
recover the hidden tokens from their contexts. The default mask ratio is
exactly 0.20. Schedule defaults (epochs, learning rate) are pragmatic, not
normative.
"""

from __future__ import annotations

import random
from pathlib import Path

from .backends import TinyMlmBackend


def mask_positions(n: int, mask_ratio: float, rng: random.Random) -> list[int]:
    """Positions to hide in a length-n sequence: floor(ratio*n), minimum 1."""
    if n < 1:
        raise ValueError("sequence must be non-empty")
    count = max(1, int(mask_ratio * n))
    return sorted(rng.sample(range(n), min(count, n)))


def _read_sentences(corpus_path: str | Path) -> list[list[str]]:
    sentences = []
    with open(corpus_path, encoding="utf-8") as handle:
        for line in handle:
            tokens = [c for c in line.strip() if not c.isspace()]
            if tokens:
                sentences.append(tokens)
    if not sentences:
        raise ValueError(f"no sentences in {corpus_path}")
    return sentences


def finetune_tiny(
    corpus_path: str | Path,
    outdir: str | Path,
    base_dir: str | Path | None = None,
    mask_ratio: float = 0.20,
    seed: int = 0,
    epochs: int = 30,
    lr: float = 5e-3,
    device: str = "cpu",
) -> TinyMlmBackend:
    """Train (or continue training) a tiny MLM on a plain corpus.

    Without a base model a fresh one is initialized over the corpus
    vocabulary; with one, its weights continue training, which is the
    domain-adaptation path.
    """
    if not 0.0 < mask_ratio < 1.0:
        raise ValueError(f"mask_ratio must be in (0, 1), got {mask_ratio}")
    import torch

    rng = random.Random(seed)
    torch.manual_seed(seed)
    sentences = _read_sentences(corpus_path)
    if base_dir is not None:
        backend = TinyMlmBackend.load(base_dir, device=device)
    else:
        vocab = sorted({t for s in sentences for t in s})
        backend = TinyMlmBackend(vocab, device=device)
    examples: list[tuple[list[int], int]] = []
    for sentence in sentences:
        known = [t for t in sentence]
        for position in mask_positions(len(sentence), mask_ratio, rng):
            target = backend.stoi.get(known[position])
            if target is None:
                continue  # token outside the model vocabulary
            examples.append((backend._context_ids(known, position), target))
    if not examples:
        raise ValueError("corpus shares no tokens with the model vocabulary")

    contexts = torch.tensor([c for c, _ in examples], dtype=torch.long, device=device)
    targets = torch.tensor([t for _, t in examples], dtype=torch.long, device=device)
    optimizer = torch.optim.Adam(backend.model.parameters(), lr=lr)
    loss_fn = torch.nn.CrossEntropyLoss()
    backend.model.train()
    for _ in range(epochs):
        optimizer.zero_grad()
        loss = loss_fn(backend.logits(contexts), targets)
        loss.backward()
        optimizer.step()
    backend.model.eval()
    backend.save(outdir)
    return backend
