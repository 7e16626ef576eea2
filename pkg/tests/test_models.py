import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from byakta.errors import MissingParameter, ShapeMismatch
from byakta.models import (ModelConfig, forward_text2mel, init_ssrn, init_text2mel, ssrn, synthesize_mels,
                           transfer_init)
from byakta.models.experiments import attention_diagonality, train_ssrn, train_text2mel
from byakta.models.losses import guided_attention_loss, guided_attention_mask, spectrogram_loss
from byakta.models.text2mel import EMBED, SynthesisState, attend, audio_decoder, audio_encoder
from byakta.models.toy import ToyCorpus, bangla_corpus, latin_vocab, utterance_mel
from byakta.models.train import SsrnBatch, Text2MelBatch, text2mel_loss, train_step_ssrn, train_step_text2mel
from byakta.neural import OptimizerState, Tensor, no_grad
from byakta.text import Vocabulary

SMALL = ModelConfig(vocab_size=12, d=16, e=8, c=8, n_mels=10, bins=17, max_frames=30)


def _ids(rng, batch=2, n=6, vocab=12):
    ids = rng.integers(2, vocab, (batch, n))
    ids[:, -1] = 1
    return ids


def test_text2mel_shapes():
    rng = np.random.default_rng(0)
    params = init_text2mel(SMALL)
    logits, mel, a = forward_text2mel(_ids(rng), rng.uniform(0, 1, (2, 10, 9)), params, SMALL)
    assert logits.shape == mel.shape == (2, 10, 9)
    assert a.shape == (2, 6, 9)
    assert ((mel.data > 0) & (mel.data < 1)).all()


def test_init_is_seeded():
    a, b, c = init_text2mel(SMALL, 3), init_text2mel(SMALL, 3), init_text2mel(SMALL, 4)
    assert all(np.array_equal(a[k].data, b[k].data) for k in a)
    assert not np.array_equal(a[EMBED].data, c[EMBED].data)
    assert a[EMBED].shape == (12, 8)


def test_attention_columns_are_distributions():
    rng = np.random.default_rng(1)
    params = init_text2mel(SMALL)
    ids = _ids(rng)
    ids[1, 4:] = 0
    _, _, a = forward_text2mel(ids, rng.uniform(0, 1, (2, 10, 7)), params, SMALL, key_mask=ids != 0)
    assert np.allclose(a.data.sum(axis=1), 1.0, atol=1e-6) and (a.data >= 0).all()
    assert (a.data[1, 4:] == 0).all()


def test_orthogonal_keys_select_values():
    eye = np.eye(4)[None] * 50.0
    values = Tensor(np.arange(16.0).reshape(1, 4, 4))
    a, r = attend(Tensor(eye), values, Tensor(eye))
    assert np.allclose(a.data[0], np.eye(4), atol=1e-6)
    assert np.allclose(r.data, values.data, atol=1e-4)


def test_attend_shape_errors():
    with pytest.raises(ShapeMismatch):
        attend(Tensor(np.zeros((1, 4, 3))), Tensor(np.zeros((1, 4, 2))), Tensor(np.zeros((1, 4, 5))))


def test_monotonic_window():
    state = SynthesisState(1)
    state.position[0] = 0
    keys = Tensor(np.eye(8)[None])
    # scores grow with the index, so unconstrained attention would pick 7
    q = Tensor(np.arange(8.0)[None, :, None])
    a, _ = attend(keys, keys, q, monotonic=True, state=state, cfg=SMALL)
    assert a.data[0, 4:, 0].sum() == 0
    assert state.position[0] == 3


def _prefix_twins(rng, channels, length, cut):
    x = rng.uniform(0, 1, (1, channels, length)).astype(np.float32)
    y = rng.uniform(0, 1, (1, channels, length)).astype(np.float32)
    y[:, :, :cut] = x[:, :, :cut]
    return x, y


@pytest.mark.parametrize("part", ["encoder", "decoder"])
def test_causality(part):
    rng = np.random.default_rng(2)
    params = init_text2mel(SMALL)
    cut = 17
    with no_grad():
        if part == "encoder":
            x, y = _prefix_twins(rng, SMALL.n_mels, 40, cut)
            fx, fy = audio_encoder(x, params, SMALL).data, audio_encoder(y, params, SMALL).data
        else:
            (rx, ry), (qx, qy) = _prefix_twins(rng, SMALL.d, 40, cut), _prefix_twins(rng, SMALL.d, 40, cut)
            fx = audio_decoder(Tensor(rx), Tensor(qx), params, SMALL)[1].data
            fy = audio_decoder(Tensor(ry), Tensor(qy), params, SMALL)[1].data
    assert np.array_equal(fx[:, :, :cut], fy[:, :, :cut])
    assert not np.array_equal(fx[:, :, cut:], fy[:, :, cut:])


@settings(max_examples=10, deadline=None)
@given(st.integers(1, 12))
def test_ssrn_upsamples_by_four(t):
    params = init_ssrn(SMALL)
    _, mag = ssrn(np.random.default_rng(t).uniform(0, 1, (1, 10, t)), params, SMALL)
    assert mag.shape == (1, 17, 4 * t)
    assert ((mag.data > 0) & (mag.data < 1)).all()


def test_ssrn_default_bins():
    cfg = ModelConfig()
    _, mag = ssrn(np.zeros((1, 80, 5)), init_ssrn(cfg), cfg)
    assert mag.shape == (1, 513, 20)
    with pytest.raises(ShapeMismatch):
        ssrn(np.zeros((1, 79, 5)), init_ssrn(cfg), cfg)


def _mask_loops(n, t, g):
    return np.array([[1 - np.exp(-((i / n - j / t) ** 2) / (2 * g * g)) for j in range(t)] for i in range(n)])


@settings(max_examples=30)
@given(st.integers(1, 20), st.integers(1, 20), st.floats(0.05, 1.0))
def test_guided_mask_closed_form(n, t, g):
    w = guided_attention_mask(n, t, g)
    assert np.allclose(w, _mask_loops(n, t, g), atol=1e-12)
    assert ((w >= 0) & (w <= 1)).all()


def test_guided_mask_examples():
    w = guided_attention_mask(16, 16, 0.2)
    assert (np.diag(w) == 0).all()
    assert abs(w[8, 0] - 0.95606) < 1e-5
    with pytest.raises(ValueError):
        guided_attention_mask(3, 3, 0.0)


def test_guided_loss_diagonal_and_uniform():
    n = 7
    w = guided_attention_mask(n, n, 0.2)
    assert float(guided_attention_loss(Tensor(np.eye(n)), w).data) == 0.0
    uniform = np.full((n, 5), 1 / n)
    w2 = guided_attention_mask(n, 5)
    brute = sum(uniform[i, j] * w2[i, j] for i in range(n) for j in range(5)) / uniform.size
    assert np.isclose(float(guided_attention_loss(Tensor(uniform), w2).data), brute)
    assert brute > 0


def test_spectrogram_loss_examples():
    half = Tensor(np.full((1, 3, 4), 0.5))
    total, l1, bce = spectrogram_loss(half, Tensor(np.zeros((1, 3, 4))), np.full((1, 3, 4), 0.5))
    assert float(l1.data) == 0 and np.isclose(float(bce.data), np.log(2), atol=1e-6)
    binary = np.array([[[0.0, 1.0, 1.0]]])
    logits = Tensor(np.where(binary > 0, 60.0, -60.0))
    total, l1, bce = spectrogram_loss(Tensor(binary), logits, binary)
    assert float(total.data) < 1e-20
    with pytest.raises(ShapeMismatch):
        spectrogram_loss(half, half, np.zeros((1, 3, 5)))


def test_padded_frames_do_not_count():
    target = np.zeros((1, 2, 4))
    pred = np.zeros((1, 2, 4))
    pred[..., 3] = 0.9
    mask = np.array([[True, True, True, False]])
    _, l1, _ = spectrogram_loss(Tensor(pred), Tensor(np.zeros_like(pred)), target, mask)
    assert float(l1.data) == 0


def _single_pair(cfg):
    vocab = Vocabulary.default()
    corpus = ToyCorpus(vocab, ("কমল",))
    return corpus, cfg.with_vocab(len(vocab))


def test_loss_components_finite_on_random_data():
    rng = np.random.default_rng(3)
    batch = Text2MelBatch.from_pairs([(_ids(rng, 1)[0], rng.uniform(0, 1, (10, 9))),
                                      (_ids(rng, 1, 4)[0], rng.uniform(0, 1, (10, 5)))])
    params = init_text2mel(SMALL)
    losses = train_step_text2mel(batch, params, OptimizerState(lr=1e-3), SMALL)
    for v in (losses.l1, losses.bce, losses.attention):
        assert np.isfinite(v) and v >= 0


def test_decoder_inputs_shift():
    mel = np.arange(6.0).reshape(1, 6)
    batch = Text2MelBatch.from_pairs([([2, 1], mel)])
    assert np.array_equal(batch.decoder_inputs()[0, 0], [0, 0, 1, 2, 3, 4])


def test_zero_lr_keeps_params():
    corpus, cfg = _single_pair(ModelConfig(d=16, e=8, c=8))
    params = init_text2mel(cfg)
    before = params.copy()
    train_step_text2mel(corpus.text2mel_batch(), params, OptimizerState(lr=0.0), cfg)
    assert all(np.array_equal(before[k].data, params[k].data) for k in params)
    sparams = init_ssrn(cfg)
    sbefore = sparams.copy()
    loss = train_step_ssrn(corpus.ssrn_batch(cfg.bins), sparams, OptimizerState(lr=0.0), cfg)
    assert np.isfinite(loss)
    assert all(np.array_equal(sbefore[k].data, sparams[k].data) for k in sparams)


@pytest.mark.slow
def test_text2mel_single_pair_overfit():
    corpus, cfg = _single_pair(ModelConfig())
    run = train_text2mel(corpus, cfg, 200)
    assert run.final_total < run.history[0]


@pytest.mark.slow
def test_ssrn_single_pair_overfit():
    corpus, cfg = _single_pair(ModelConfig())
    run = train_ssrn(corpus, cfg, 200)
    assert run.final_total <= 0.5 * run.history[0]


def test_synthesis_frame_bound_and_window():
    rng = np.random.default_rng(4)
    ids = _ids(rng, 3, 7)
    ids[2, 4:] = 0
    ids[2, 3] = 1
    out = synthesize_mels(ids, init_text2mel(SMALL), SMALL)
    assert out.mels.shape[2] <= SMALL.max_frames
    assert (out.lengths <= SMALL.max_frames).all()
    prev = np.zeros(3, dtype=int)
    for t in range(out.positions.shape[1]):
        step = out.positions[:, t] - prev
        assert ((step >= -1) & (step <= 3)).all()
        prev = out.positions[:, t]
    assert (out.positions[2] <= 3).all()
    assert np.allclose(out.attention.sum(axis=1), 1.0, atol=1e-6)


def test_synthesis_deterministic():
    ids = np.array([2, 5, 7, 1])
    params = init_text2mel(SMALL)
    a, b = synthesize_mels(ids, params, SMALL), synthesize_mels(ids, params, SMALL)
    assert np.array_equal(a.mels, b.mels)


@pytest.mark.slow
def test_overfit_then_generate():
    corpus, cfg = _single_pair(ModelConfig())
    run = train_text2mel(corpus, cfg, 600)
    ids, target = corpus.pairs()[0]
    out = synthesize_mels(np.asarray(ids), run.params, cfg)
    t = target.shape[1]
    assert out.lengths[0] >= t
    assert np.abs(out.row(0)[:, :t] - target).mean() < 0.1


def test_diagonality_metric():
    assert attention_diagonality(np.eye(5)[None], [5], [5]) == 1.0
    anti = np.eye(5)[::-1][None]
    assert attention_diagonality(anti, [5], [5]) < 0.5


def test_transfer_identity():
    vocab = latin_vocab()
    cfg = ModelConfig(d=16, e=8, c=8).with_vocab(len(vocab))
    params = init_text2mel(cfg)
    moved = transfer_init(params, vocab, vocab, cfg)
    assert list(moved) == list(params)
    assert all(np.array_equal(moved[k].data, params[k].data) for k in params)
    moved[EMBED].data[0, 0] += 1
    assert moved[EMBED].data[0, 0] != params[EMBED].data[0, 0]


def test_transfer_shared_rows():
    old, new = latin_vocab(), Vocabulary.default()
    cfg = ModelConfig(d=16, e=8, c=8)
    params = init_text2mel(cfg.with_vocab(len(old)))
    moved = transfer_init(params, old, new, cfg, seed=5)
    assert moved[EMBED].shape == (len(new), 8)
    for sym in (" ", "।", "a"):
        if sym in old.index and sym in new.index:
            assert np.array_equal(moved[EMBED].data[new.index[sym]], params[EMBED].data[old.index[sym]])
    assert np.array_equal(moved["audioenc.c0.w"].data, params["audioenc.c0.w"].data)
    again = transfer_init(params, old, new, cfg, seed=5)
    assert np.array_equal(again[EMBED].data, moved[EMBED].data)


def test_transfer_errors():
    vocab = latin_vocab()
    cfg = ModelConfig(d=16, e=8, c=8).with_vocab(len(vocab))
    params = init_text2mel(cfg)
    del params[EMBED]
    with pytest.raises(MissingParameter):
        transfer_init(params, vocab, vocab)
    params = init_text2mel(cfg)
    with pytest.raises(ShapeMismatch):
        transfer_init(params, vocab, vocab, ModelConfig(d=32, e=8, c=8))


def test_toy_corpus():
    c = bangla_corpus(0)
    assert c == bangla_corpus(0) and len(c.texts) == 4
    ids, mel = c.pairs()[0]
    assert ids[-1] == 1 and mel.shape == (80, 3 * len(ids))
    assert ((mel >= 0) & (mel <= 1)).all()
    assert np.array_equal(utterance_mel(list("ক") + ["<END>"])[:, :3], utterance_mel(list("কখ"))[:, :3])


def test_ssrn_batch_padding():
    b = SsrnBatch.from_pairs([(np.ones((2, 3)), np.ones((5, 12))), (np.ones((2, 1)), np.ones((5, 4)))])
    assert b.linear.shape == (2, 5, 12)
    assert b.frame_mask()[1].sum() == 4
