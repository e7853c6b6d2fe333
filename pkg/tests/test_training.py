import io

import numpy as np
import pytest

from evt.corpus import Corpus
from evt.network import NetworkConfig, batch_loss, loss_and_grads
from evt.synthetic import generate_synthetic_corpus, random_vectors, template_vocabulary
from evt.embeddings import EmbeddingTable
from evt.training import (
    TINY_CONFIG, ConfigError, EarlyStopping, OptimizerState, TrainConfig, backward,
    clip_global_norm, format_config, global_norm, grad_check, nadam_step, parse_config,
    tiny_problem, train,
)

import oracles


def test_clip_below_tau_unchanged():
    g = {"a": np.array([0.3, 0.4])}
    assert clip_global_norm(g, 1.0)["a"].tolist() == [0.3, 0.4]


def test_clip_halves():
    g = {"a": np.array([1.2, 0.0]), "b": np.array([[1.6]])}
    out = clip_global_norm(g, 1.0)
    np.testing.assert_allclose(out["a"], [0.6, 0.0])
    np.testing.assert_allclose(out["b"], [[0.8]])
    assert global_norm(out) <= 1.0


def test_clip_zero_gradients():
    out = clip_global_norm({"a": np.zeros(3)}, 1.0)
    assert not out["a"].any() and np.isfinite(out["a"]).all()


@pytest.mark.parametrize("seed", range(30))
def test_clip_norm_never_exceeds_tau(seed):
    rng = np.random.default_rng(seed)
    g = {k: rng.normal(scale=rng.uniform(0.01, 100), size=rng.integers(1, 50)) for k in "abc"}
    norm = global_norm(g)
    out = clip_global_norm(g, 1.0)
    assert global_norm(out) <= 1.0
    assert global_norm(out) == pytest.approx(min(norm, 1.0), rel=1e-12)


def test_nadam_zero_gradient_noop():
    params = {"w": np.array([0.7, -2.0])}
    new, state = nadam_step(params, {"w": np.zeros(2)}, OptimizerState.zeros_like(params), TrainConfig())
    np.testing.assert_array_equal(new["w"], params["w"])
    assert state.step == 1


def test_nadam_first_step_hand_value():
    # t=1, g=1: m=0.1, v=0.001, m_hat=1, v_hat=1,
    # lookahead = 0.9 * 1 + 0.1 * 1 / 0.1 = 1.9, step = 0.002 * 1.9 / (1 + 1e-8)
    params = {"w": np.array([0.0])}
    new, _ = nadam_step(params, {"w": np.array([1.0])}, OptimizerState.zeros_like(params),
                        TrainConfig())
    assert new["w"][0] == pytest.approx(-0.0038 / (1 + 1e-8), rel=1e-12)


def test_nadam_descends_quadratic():
    config = TrainConfig(learning_rate=0.1)
    params = {"w": np.array([3.0, -2.0])}
    state = OptimizerState.zeros_like(params)
    losses = [float(np.sum(params["w"] ** 2))]
    for _ in range(2):
        params, state = nadam_step(params, {"w": 2 * params["w"]}, state, config)
        losses.append(float(np.sum(params["w"] ** 2)))
    assert losses[0] > losses[1] > losses[2]


def test_early_stopping_rule():
    stopper = EarlyStopping(patience=2)
    scores = [0.1, 0.5, 0.7, 0.7, 0.6, 0.9]
    stopped_at = None
    for epoch, s in enumerate(scores, start=1):
        stopper.update(epoch, s)
        if stopper.stop:
            stopped_at = epoch
            break
    assert stopped_at == 5 and stopper.best_epoch == 3


def tiny_data():
    words = template_vocabulary()
    table = EmbeddingTable.from_dict(random_vectors(words, 4, 0))
    return generate_synthetic_corpus(0, 12), table


def test_train_stops_after_patience_on_plateau():
    corpus, table = tiny_data()
    config = NetworkConfig(lstm_units=3, char_emb_dim=3, char_filters=3)
    # empty dev set: dev F1 is 0 every epoch, so epoch 1 is the last improvement
    _, history = train(corpus, Corpus(), table, config,
                       TrainConfig(max_epochs=10, patience=2, seed=0))
    assert [r.epoch for r in history.epochs] == [1, 2, 3]
    assert history.best_epoch == 1


def test_train_rejects_empty_corpus():
    _, table = tiny_data()
    with pytest.raises(ValueError):
        train(Corpus(), Corpus(), table, NetworkConfig(), TrainConfig())


def test_train_deterministic():
    corpus, table = tiny_data()
    config = NetworkConfig(lstm_units=4, char_emb_dim=3, char_filters=3)
    runs = [train(corpus, corpus, table, config, TrainConfig(max_epochs=2, seed=5)) for _ in range(2)]
    assert runs[0][1] == runs[1][1]
    for k, v in runs[0][0].params.items():
        np.testing.assert_array_equal(v, runs[1][0].params[k])


def test_train_clips_every_step():
    corpus, table = tiny_data()
    config = NetworkConfig(lstm_units=4, char_emb_dim=3, char_filters=3)
    _, history = train(corpus, corpus, table, config, TrainConfig(max_epochs=2, tau=0.01))
    assert history.n_steps == 4
    assert 0 < history.max_clipped_norm <= 0.01


def test_duplicate_sentence_batch_same_gradient():
    model, batch, _ = tiny_problem(TINY_CONFIG, 3)
    one = backward(model, batch[:1])
    two = backward(model, [batch[0], batch[0]])
    for k in one:
        np.testing.assert_allclose(two[k], one[k], atol=1e-14)
    assert batch_loss(model, [batch[0]] * 3) == pytest.approx(batch_loss(model, batch[:1]), abs=1e-14)


def test_gradient_emission_marginals_on_enumerable_instance():
    # with proj.W = 0 the emissions are exactly proj.b, so d/d proj.b is the sum over
    # tokens of (marginal - gold indicator), computable by enumerating all paths
    config = NetworkConfig(lstm_units=2, char_emb_dim=2, char_filters=2, word_dim=4, n_labels=15)
    model, batch, _ = tiny_problem(config, 0)
    sent = batch[1]
    model.params["proj.W"][:] = 0.0
    rng = np.random.default_rng(0)
    model.params["proj.b"][:] = rng.normal(size=15)
    trans = rng.normal(size=(15, 15))
    model.params["crf.transitions"][:] = trans
    grads = backward(model, [sent])
    em = [model.params["proj.b"].tolist()] * len(sent)
    marg = np.array(oracles.unary_marginals(em, trans.tolist(), model.params["crf.start"].tolist(),
                                            model.params["crf.end"].tolist()))
    gold = [1, 2, 2]  # B-OCCURRENCE I-OCCURRENCE I-OCCURRENCE
    expected = marg.copy()
    expected[np.arange(3), gold] -= 1.0
    np.testing.assert_allclose(grads["proj.b"], expected.sum(axis=0), atol=1e-10)


def test_grad_check_default_tiny_model():
    model, _, _ = tiny_problem(TINY_CONFIG, 0)
    assert model.n_parameters <= 2000
    err = grad_check(seed=0)
    assert err <= 1e-4
    assert grad_check(seed=0) == err


def test_grad_check_step_size_smoothness():
    a = grad_check(seed=2, h=1e-5)
    b = grad_check(seed=2, h=2e-5)
    assert 0.1 < b / a < 10


def test_one_small_step_reduces_loss():
    model, batch, _ = tiny_problem(TINY_CONFIG, 4)
    before, grads = loss_and_grads(model, batch)
    params, _ = nadam_step(model.params, grads, OptimizerState.zeros_like(model.params),
                           TrainConfig(learning_rate=1e-4))
    model.params.update(params)
    assert batch_loss(model, batch) < before


def test_parse_config_round_trip():
    net, tcfg = NetworkConfig(lstm_units=7), TrainConfig(seed=9, tau=0.5)
    net2, tcfg2 = parse_config(io.StringIO("# comment\n\n" + format_config(net, tcfg)))
    assert (net2, tcfg2) == (net, tcfg)


def test_parse_config_unknown_key():
    with pytest.raises(ConfigError, match="line 2"):
        parse_config(io.StringIO("batch_size = 4\nlearning_rat = 0.1\n"))


@pytest.mark.parametrize("text", ["batch_size = four\n", "batch_size\n", "tau = -1\n"])
def test_parse_config_bad_values(text):
    with pytest.raises(ConfigError):
        parse_config(io.StringIO(text))
