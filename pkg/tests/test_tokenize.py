"""Normalization, vocabulary construction, and encoding."""

import numpy as np
import pytest

from phishkit.tokenize import (
    PAD_ID,
    PAD_TOKEN,
    TokenSequence,
    UNK_ID,
    UNK_TOKEN,
    Vocabulary,
    build_vocab,
    encode,
    normalize,
)


@pytest.mark.parametrize(
    "raw,expected",
    [
        ("Urgent: ACT Now", "urgent: act now"),
        ("a\n\n b", "a b"),
        ("[NAME]", "[name]"),
        ("  padded\tout  ", "padded out"),
        ("", ""),
    ],
)
def test_normalize(raw, expected):
    assert normalize(raw) == expected


def test_normalize_idempotent():
    for raw in ("A  B\nC", "hello [NAME]!", "x"):
        assert normalize(normalize(raw)) == normalize(raw)


def test_build_vocab_frequency_order():
    v = build_vocab(["a a b"])
    assert v.id_for("a") == 2 and v.id_for("b") == 3
    assert v.id_for(UNK_TOKEN) == UNK_ID and v.id_for(PAD_TOKEN) == PAD_ID
    assert len(v) == 4


def test_build_vocab_min_freq_drops_rare_tokens():
    v = build_vocab(["a a b"], min_freq=2)
    assert "a" in v and "b" not in v
    assert encode("a b", v).ids == (2, UNK_ID)


def test_build_vocab_lexicographic_tie_break():
    v = build_vocab(["b a"])
    assert v.id_for("a") == 2 and v.id_for("b") == 3


def test_build_vocab_max_size_never_evicts_specials():
    v = build_vocab(["a a b c"], max_size=3)
    assert len(v) == 3
    assert v.id_for("a") == 2 and "b" not in v and "c" not in v
    v2 = build_vocab(["a b"], max_size=2)
    assert len(v2) == 2 and UNK_TOKEN in v2 and PAD_TOKEN in v2


def test_build_vocab_errors():
    with pytest.raises(ValueError, match="empty corpus"):
        build_vocab([])
    with pytest.raises(ValueError, match="max_size"):
        build_vocab(["a"], max_size=1)


def test_vocabulary_inverse_mapping():
    v = build_vocab(["verify your account now now"])
    for token, idx in v.items():
        assert v.token_for(idx) == token
        assert v.id_for(token) == idx


def test_vocabulary_rejects_bad_tables():
    with pytest.raises(ValueError, match="must map"):
        Vocabulary({UNK_TOKEN: 1, PAD_TOKEN: 0})
    with pytest.raises(ValueError, match="contiguous"):
        Vocabulary({UNK_TOKEN: 0, PAD_TOKEN: 1, "a": 5})


def test_encode_splitting_rules():
    v = build_vocab(["verify your account ! [name] , hi"])
    seq = encode("verify your account!", v)
    assert seq.tokens == ("verify", "your", "account", "!")
    seq2 = encode("[name] , hi", v)
    assert seq2.tokens == ("[name]", ",", "hi")
    assert all(i != UNK_ID for i in seq2.ids)


def test_encode_oov_goes_to_unk():
    v = build_vocab(["known words only"])
    seq = encode("known unknown", v)
    assert seq.ids == (v.id_for("known"), UNK_ID)


def test_encode_truncates_to_max_len():
    v = build_vocab(["a b c d e"])
    seq = encode("a b c d e", v, max_len=3)
    assert len(seq) == 3 and seq.tokens == ("a", "b", "c")


def test_encode_spans_reconstruct_normalized_text():
    rng = np.random.default_rng(11)
    words = ["verify", "account", "now", "[name]", "x1", "hello", "z"]
    puncts = ["!", ",", ".", "?", ":"]
    v = build_vocab([" ".join(words + puncts)])
    for _ in range(50):
        parts = []
        for _ in range(int(rng.integers(1, 12))):
            pool = words if rng.random() < 0.7 else puncts
            parts.append(pool[int(rng.integers(len(pool)))])
        text = normalize(" ".join(parts))
        seq = encode(text, v)
        rebuilt = ""
        prev = 0
        for tok, (s, e) in zip(seq.tokens, seq.spans):
            assert text[s:e] == tok
            rebuilt += text[prev:s] + tok
            prev = e
        rebuilt += text[prev:]
        assert rebuilt == text


def test_encode_deterministic():
    v = build_vocab(["some words here"])
    a = encode("some unknown words", v)
    b = encode("some unknown words", v)
    assert a == b


def test_token_sequence_validation():
    with pytest.raises(ValueError, match="equal length"):
        TokenSequence((1,), ("a", "b"), ((0, 1),))
    with pytest.raises(ValueError, match="ordered"):
        TokenSequence((1, 2), ("a", "b"), ((2, 3), (0, 1)))


def test_vocab_save_load_roundtrip(tmp_path):
    v = build_vocab(["verify your account now now"], min_freq=1, max_size=10)
    path = tmp_path / "vocab.json"
    v.save(path)
    w = Vocabulary.load(path)
    assert w == v
    assert w.min_freq == 1 and w.max_size == 10


def test_vocab_extension_appends_without_reordering():
    # train tokens all have freq >= 2; extra docs add only singletons, so
    # train-derived ids are unchanged and new tokens take appended ids
    train = ["alpha alpha beta beta gamma gamma"]
    extra = ["delta epsilon"]
    v_train = build_vocab(train)
    v_ext = build_vocab(train + extra)
    for token, idx in v_train.items():
        assert v_ext.id_for(token) == idx
    assert v_ext.id_for("delta") >= len(v_train)
