"""Word-id vocabulary built from the template corpus.

Id 0 is the unknown-word slot; the rest are the corpus words in sorted
order, so the file layout (one word per line, id = line number) is
deterministic for a given bank.
"""

from __future__ import annotations

import numpy as np

from .templates import TemplateBank

UNK = "<unk>"


class Vocabulary:
    def __init__(self, words):
        words = list(words)
        if not words or words[0] != UNK:
            raise ValueError(f"vocabulary must start with {UNK!r}")
        if len(set(words)) != len(words):
            raise ValueError("duplicate words in vocabulary")
        self.words = words
        self.ids = {w: i for i, w in enumerate(words)}
        self.unk_id = 0

    def __len__(self):
        return len(self.words)

    def __contains__(self, word):
        return word in self.ids

    def tokenize(self, text: str) -> list:
        toks = [self.ids.get(w, self.unk_id) for w in text.split()]
        if not toks:
            raise ValueError("cannot tokenize empty text")
        if len(toks) > 40:
            raise ValueError(f"instruction too long: {len(toks)} tokens")
        return toks


def build_vocabulary(bank: TemplateBank) -> Vocabulary:
    words = set()
    for sent in bank.all_sentences():
        words.update(sent.split())
    return Vocabulary([UNK] + sorted(words))


def save_vocabulary(vocab: Vocabulary, path):
    with open(path, "w") as f:
        f.write("\n".join(vocab.words) + "\n")


def load_vocabulary(path) -> Vocabulary:
    with open(path) as f:
        words = [ln.strip() for ln in f if ln.strip()]
    return Vocabulary(words)


def load_word_vectors(path, vocab: Vocabulary, dim: int = 50,
                      rng: np.random.Generator | None = None) -> np.ndarray:
    """Optional init hook: rows "word v1 .. v50"; absent words stay random."""
    rng = rng or np.random.default_rng(0)
    table = rng.uniform(-0.1, 0.1, size=(len(vocab), dim))
    with open(path) as f:
        for ln in f:
            parts = ln.split()
            if len(parts) != dim + 1:
                continue
            wid = vocab.ids.get(parts[0])
            if wid is not None:
                table[wid] = [float(v) for v in parts[1:]]
    return table
