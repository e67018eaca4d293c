"""Language tests: keywords, templates, vocabulary, misleading synthesis."""

import collections
import math

import numpy as np
import pytest

from langdrive.language import (ALL_KEYWORDS, CONNECTIVES, NoMisleadingPossible,
                                TemplateBank, Vocabulary, bank_from_json,
                                bank_to_json, build_vocabulary, double,
                                eligible_keywords, generate_instruction,
                                generate_misleading, keyword_by_name,
                                load_vocabulary, load_word_vectors, ordinal,
                                render, save_vocabulary, single)
from langdrive.world import build_town, spawn_on_edge
from langdrive.world.geometry import point_on_polyline


@pytest.fixture(scope="module")
def bank():
    b = TemplateBank()
    b.check()
    return b


@pytest.fixture(scope="module")
def vocab(bank):
    return build_vocabulary(bank)


# -- keyword taxonomy -------------------------------------------------------


def test_fourteen_keywords():
    assert len(ALL_KEYWORDS) == 14
    cats = collections.Counter(k.category for k in ALL_KEYWORDS)
    assert cats == {"single": 3, "double": 7, "ordinal": 4}
    names = {k.name for k in ALL_KEYWORDS}
    assert "straight_straight" in names
    # doubles never start with straight except straight_straight
    assert "straight_left" not in names and "straight_right" not in names


def test_keyword_turn_sequences():
    assert single("left").turns() == ("left",)
    assert double("left", "right").turns() == ("left", "right")
    assert ordinal("first", "right").turns() == ("right",)
    assert ordinal("second", "left").turns() == ("straight", "left")


def test_eligible_keywords_by_turns():
    one = eligible_keywords(("left",))
    assert {k.name for k in one} == {"left", "first_left"}
    assert {k.name for k in eligible_keywords(("straight",))} == {"straight"}
    assert {k.name for k in eligible_keywords(("straight", "right"))} == {"second_right"}
    assert {k.name for k in eligible_keywords(("right", "straight"))} == {"right_straight"}
    assert {k.name for k in eligible_keywords(("straight", "straight"))} == \
        {"straight_straight"}
    with pytest.raises(ValueError):
        eligible_keywords(("left", "left", "left"))


def test_keyword_by_name_roundtrip():
    for k in ALL_KEYWORDS:
        assert keyword_by_name(k.name) == k
    with pytest.raises(KeyError):
        keyword_by_name("u_turn")


# -- templates --------------------------------------------------------------


def test_template_counts(bank):
    for d in ("left", "right", "straight"):
        assert len(bank.singles[d]) >= 10
    for name, groups in bank.ordinals.items():
        assert len(groups) == 2
        assert sum(len(g) for g in groups) >= 5
    for k in ALL_KEYWORDS:
        assert bank.variants(k) >= 3


def test_rendered_text_is_clean(bank, vocab):
    rng = np.random.default_rng(0)
    for k in ALL_KEYWORDS:
        for _ in range(30):
            text = render(bank, k, rng)
            assert text == text.lower()
            assert text.strip() == text
            assert "  " not in text
            assert all(ch.isalpha() or ch == " " for ch in text), text


def test_direction_word_present(bank):
    # left/right must be named; straight may be paraphrased ("keep going")
    rng = np.random.default_rng(1)
    for k in ALL_KEYWORDS:
        for _ in range(20):
            words = render(bank, k, rng).split()
            for d in set(k.turns()) - {"straight"}:
                assert d in words


def test_single_draw_uniformity():
    # three-template bank: each template 1/3 +- 0.02 over 10k draws
    tiny = TemplateBank(singles={"left": ["turn left", "take a left", "left"],
                                 "right": ["right"], "straight": ["straight"]})
    rng = np.random.default_rng(7)
    counts = collections.Counter(render(tiny, single("left"), rng)
                                 for _ in range(10_000))
    assert set(counts) == {"turn left", "take a left", "left"}
    for c in counts.values():
        assert abs(c / 10_000 - 1 / 3) < 0.02


def test_ordinal_group_then_sentence(bank):
    # groups are drawn first: each group's total frequency is near 1/2
    # even though group sizes differ
    rng = np.random.default_rng(3)
    groups = bank.ordinals["second_left"]
    in_a = sum(render(bank, ordinal("second", "left"), rng) in groups[0]
               for _ in range(6000)) / 6000
    assert abs(in_a - 0.5) < 0.03
    assert len(groups[0]) != len(groups[1])


def test_double_uses_connectives(bank):
    rng = np.random.default_rng(5)
    seen_conn = set()
    for _ in range(300):
        text = render(bank, double("left", "right"), rng)
        for c in CONNECTIVES:
            if c and f" {c} " in text:
                seen_conn.add(c)
    assert seen_conn == {c for c in CONNECTIVES if c}


def test_instruction_token_bounds(bank, vocab):
    rng = np.random.default_rng(11)
    for k in ALL_KEYWORDS:
        for _ in range(50):
            ins = generate_instruction(bank, vocab, k, rng)
            assert 1 <= len(ins.tokens) <= 40
            assert all(0 <= t < len(vocab) for t in ins.tokens)
            assert not ins.misleading


def test_bank_json_roundtrip(bank):
    doc = bank_to_json(bank)
    again = bank_from_json(doc)
    assert bank_to_json(again) == doc
    with pytest.raises(ValueError):
        bank_from_json('{"format_version": 99}')


# -- vocabulary -------------------------------------------------------------


def test_vocab_dense_and_deterministic(bank, vocab):
    assert vocab.words[0] == "<unk>"
    assert sorted(vocab.ids.values()) == list(range(len(vocab)))
    assert build_vocabulary(bank).words == vocab.words


def test_no_unknown_tokens_from_bank(bank, vocab):
    rng = np.random.default_rng(2)
    for k in ALL_KEYWORDS:
        for _ in range(200):
            ins = generate_instruction(bank, vocab, k, rng)
            assert vocab.unk_id not in ins.tokens


def test_unknown_word_maps_to_unk(vocab):
    toks = vocab.tokenize("turn zorp")
    assert toks[0] != vocab.unk_id
    assert toks[1] == vocab.unk_id


def test_tokenize_rejects_empty(vocab):
    with pytest.raises(ValueError):
        vocab.tokenize("   ")


def test_vocab_file_roundtrip(bank, vocab, tmp_path):
    p = tmp_path / "words.txt"
    save_vocabulary(vocab, p)
    again = load_vocabulary(p)
    assert again.words == vocab.words
    lines = p.read_text().splitlines()
    assert lines[0] == "<unk>"
    assert lines == vocab.words


def test_word_vector_hook(vocab, tmp_path):
    p = tmp_path / "vectors.txt"
    vec = " ".join(["0.5"] * 50)
    p.write_text(f"left {vec}\nnotaword {vec}\n")
    table = load_word_vectors(p, vocab)
    assert table.shape == (len(vocab), 50)
    assert np.allclose(table[vocab.ids["left"]], 0.5)
    assert not np.allclose(table[vocab.ids["right"]], 0.5)


def test_vocab_rejects_bad_layout():
    with pytest.raises(ValueError):
        Vocabulary(["left", "right"])  # missing <unk> head
    with pytest.raises(ValueError):
        Vocabulary(["<unk>", "a", "a"])


# -- misleading -------------------------------------------------------------


def _state_approaching(net, edge_idx):
    e = net.edges[edge_idx]
    return spawn_on_edge(net, edge_idx, max(e.length - 5.0, 0.0))


def test_misleading_is_complement(bank, vocab):
    net = build_town("A", 0)
    rng = np.random.default_rng(0)
    checked = 0
    for e in net.edges:
        state = _state_approaching(net, e.idx)
        q = net.available_turns(state)
        if not q.at_junction:
            continue
        # the locating query agrees with the graph walk from this edge
        assert q.node == e.dst
        assert q.turns == frozenset(net.exits_from(e.idx))
        if len(q.turns) == 3:
            with pytest.raises(NoMisleadingPossible):
                generate_misleading(bank, vocab, net, state, rng)
        else:
            ins = generate_misleading(bank, vocab, net, state, rng)
            assert ins.misleading
            assert ins.keyword.category == "single"
            assert ins.keyword.parts[0] not in q.turns
            checked += 1
    assert checked >= 20


def test_misleading_random_states(bank, vocab):
    # impossible direction for 100 random junction approaches, both towns
    rng = np.random.default_rng(4)
    nets = [build_town("A", 0), build_town("B", 0)]
    done = 0
    while done < 100:
        net = nets[int(rng.integers(2))]
        e = net.edges[int(rng.integers(len(net.edges)))]
        state = _state_approaching(net, e.idx)
        q = net.available_turns(state)
        if not q.at_junction or len(q.turns) == 3:
            continue
        ins = generate_misleading(bank, vocab, net, state, rng)
        assert ins.keyword.parts[0] not in q.turns
        done += 1


def test_no_junction_ahead_raises(bank, vocab):
    net = build_town("A", 0)
    e = net.edges[0]
    mid = point_on_polyline(e.lane, e.cum, 1.0)
    state = spawn_on_edge(net, e.idx, 1.0)
    if not net.available_turns(state).at_junction:
        with pytest.raises(NoMisleadingPossible):
            generate_misleading(bank, vocab, net, state, np.random.default_rng(0))
