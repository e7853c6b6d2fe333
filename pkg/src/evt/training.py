"""Minibatch training of the tagger with Nadam and global-norm gradient clipping.

Nadam update for step t (counted from 1), gradient g:

    m = b1 * m + (1 - b1) * g
    v = b2 * v + (1 - b2) * g**2
    m_hat = m / (1 - b1**t)
    v_hat = v / (1 - b2**t)
    param -= lr * (b1 * m_hat + (1 - b1) * g / (1 - b1**t)) / (sqrt(v_hat) + eps)
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field, fields
from typing import IO, Callable

import numpy as np

from .corpus import Corpus, Sentence, Token, EventSpan
from .embeddings import CharVocab, EmbeddingTable, build_char_vocab
from .evaluation import score
from .network import (
    NetworkConfig, TaggerModel, batch_loss, init_model, loss_and_grads, sample_dropout_masks,
    tag_corpus,
)

log = logging.getLogger(__name__)


@dataclass
class TrainConfig:
    batch_size: int = 8
    tau: float = 1.0
    learning_rate: float = 0.002
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    max_epochs: int = 30
    patience: int = 5
    seed: int = 1

    def validate(self) -> "TrainConfig":
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.tau <= 0:
            raise ValueError("tau must be positive")
        if self.learning_rate <= 0 or self.epsilon <= 0:
            raise ValueError("learning_rate and epsilon must be positive")
        if not (0 <= self.beta1 < 1 and 0 <= self.beta2 < 1):
            raise ValueError("beta1 and beta2 must be in [0, 1)")
        if self.max_epochs < 1 or self.patience < 1:
            raise ValueError("max_epochs and patience must be >= 1")
        return self


# -- config files -----------------------------------------------------------------


class ConfigError(ValueError):
    pass


def _coerce(raw: str, kind):
    if kind is int:
        return int(raw)
    if kind is float:
        return float(raw)
    return raw


def parse_config(stream: IO[str]) -> tuple[NetworkConfig, TrainConfig]:
    """Read ``key = value`` lines (``#`` starts a comment) into the two configs.

    ``word_dim`` is accepted but normally left out: it comes from the vectors.
    """
    net, train = NetworkConfig(), TrainConfig()
    targets = {f.name: (net, f.type) for f in fields(NetworkConfig)}
    targets.update({f.name: (train, f.type) for f in fields(TrainConfig)})
    for line_no, raw in enumerate(stream, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not sep or not key:
            raise ConfigError(f"line {line_no}: expected 'key = value'")
        if key not in targets:
            raise ConfigError(f"line {line_no}: unknown key {key!r}")
        obj, kind = targets[key]
        kind = {"int": int, "float": float}.get(kind, kind)
        try:
            setattr(obj, key, _coerce(value, kind))
        except ValueError:
            raise ConfigError(f"line {line_no}: bad value for {key}: {value!r}") from None
    try:
        train.validate()
    except ValueError as err:
        raise ConfigError(str(err)) from None
    return net, train


def format_config(net: NetworkConfig, train: TrainConfig) -> str:
    lines = [f"{k} = {v}" for k, v in vars(net).items() if k != "word_dim"]
    lines += [f"{k} = {v}" for k, v in vars(train).items()]
    return "\n".join(lines) + "\n"


# -- optimisation primitives --------------------------------------------------------


def global_norm(grads: dict[str, np.ndarray]) -> float:
    return float(np.sqrt(sum(np.sum(g * g) for g in grads.values())))


def clip_global_norm(grads: dict[str, np.ndarray], tau: float) -> dict[str, np.ndarray]:
    """Rescale all gradients together so their joint L2 norm is at most ``tau``."""
    if tau <= 0:
        raise ValueError("tau must be positive")
    norm = global_norm(grads)
    if norm <= tau:
        return grads
    scale = tau / norm
    clipped = {k: g * scale for k, g in grads.items()}
    # rounding can leave the norm a few ulps above tau
    while global_norm(clipped) > tau:
        scale = np.nextafter(scale, 0.0)
        clipped = {k: g * scale for k, g in grads.items()}
    return clipped


@dataclass
class OptimizerState:
    m: dict[str, np.ndarray]
    v: dict[str, np.ndarray]
    step: int = 0

    @classmethod
    def zeros_like(cls, params: dict[str, np.ndarray]) -> "OptimizerState":
        return cls({k: np.zeros_like(p) for k, p in params.items()},
                   {k: np.zeros_like(p) for k, p in params.items()})


def nadam_step(params: dict[str, np.ndarray], grads: dict[str, np.ndarray],
               state: OptimizerState, config: TrainConfig):
    """One Nadam update; returns new ``(params, state)`` and leaves inputs untouched."""
    b1, b2 = config.beta1, config.beta2
    t = state.step + 1
    new_params, new_m, new_v = {}, {}, {}
    for k, p in params.items():
        g = grads[k]
        m = b1 * state.m[k] + (1 - b1) * g
        v = b2 * state.v[k] + (1 - b2) * g * g
        m_hat = m / (1 - b1**t)
        v_hat = v / (1 - b2**t)
        lookahead = b1 * m_hat + (1 - b1) * g / (1 - b1**t)
        new_params[k] = p - config.learning_rate * lookahead / (np.sqrt(v_hat) + config.epsilon)
        new_m[k], new_v[k] = m, v
    return new_params, OptimizerState(new_m, new_v, t)


def backward(model: TaggerModel, batch, masks=None):
    """Mean-NLL gradients for every trainable tensor (``masks`` -> train-mode dropout)."""
    return loss_and_grads(model, list(batch), masks)[1]


class EarlyStopping:
    """Tracks the best dev score; ``stop`` turns true after ``patience`` flat epochs."""

    def __init__(self, patience: int):
        self.patience = patience
        self.best = -np.inf
        self.best_epoch = -1
        self.bad_epochs = 0

    def update(self, epoch: int, value: float) -> bool:
        """Record an epoch's score; returns True if it is a new best."""
        if value > self.best:
            self.best, self.best_epoch, self.bad_epochs = value, epoch, 0
            return True
        self.bad_epochs += 1
        return False

    @property
    def stop(self) -> bool:
        return self.bad_epochs >= self.patience


@dataclass
class EpochRecord:
    epoch: int
    mean_nll: float
    dev_strict_f1: float
    dev_f1_class: float

    def log_line(self) -> str:
        return f"{self.epoch}, {self.mean_nll:.6f}, {self.dev_strict_f1:.6f}, {self.dev_f1_class:.6f}"


@dataclass
class TrainHistory:
    epochs: list[EpochRecord] = field(default_factory=list)
    best_epoch: int = -1
    max_clipped_norm: float = 0.0
    n_steps: int = 0

    def to_text(self) -> str:
        lines = ["epoch, mean_nll, dev_strict_f1, dev_f1_class"]
        lines += [r.log_line() for r in self.epochs]
        lines.append(f"# best_epoch = {self.best_epoch}")
        return "\n".join(lines) + "\n"


def train(train_corpus: Corpus, dev: Corpus, embeddings: EmbeddingTable,
          net_config: NetworkConfig, train_config: TrainConfig, *,
          char_vocab: CharVocab | None = None, vectors_path: str = "",
          on_epoch: Callable[[EpochRecord], None] | None = None):
    """Fit a tagger, keeping the parameters of the epoch with the best dev strict F1."""
    train_config.validate()
    sentences = [s for s in train_corpus if len(s)]
    if not sentences:
        raise ValueError("training corpus is empty")
    net_config = NetworkConfig(**{**vars(net_config), "word_dim": embeddings.dim}).validate()
    rng = np.random.default_rng(train_config.seed)
    char_vocab = char_vocab or build_char_vocab(train_corpus)
    model = init_model(net_config, char_vocab, embeddings, rng, vectors_path)
    state = OptimizerState.zeros_like(model.params)
    history = TrainHistory()
    stopper = EarlyStopping(train_config.patience)
    best_params = {k: v.copy() for k, v in model.params.items()}
    bs = train_config.batch_size

    for epoch in range(1, train_config.max_epochs + 1):
        order = rng.permutation(len(sentences))
        losses = []
        for k in range(0, len(order), bs):
            batch = [sentences[i] for i in order[k : k + bs]]
            masks = sample_dropout_masks(net_config, len(batch), rng)
            loss, grads = loss_and_grads(model, batch, masks)
            grads = clip_global_norm(grads, train_config.tau)
            norm = global_norm(grads)
            assert norm <= train_config.tau, f"clipped norm {norm} exceeds tau"
            history.max_clipped_norm = max(history.max_clipped_norm, norm)
            history.n_steps += 1
            params, state = nadam_step(model.params, grads, state, train_config)
            model.params.update(params)
            losses.append(loss * len(batch))
        report = score(dev, tag_corpus(dev, model)) if len(dev) else None
        record = EpochRecord(
            epoch,
            float(np.sum(losses) / len(sentences)),
            report.strict.f1 if report else 0.0,
            report.strict.f1_class if report else 0.0,
        )
        history.epochs.append(record)
        log.info("epoch %s", record.log_line())
        if on_epoch is not None:
            on_epoch(record)
        if stopper.update(epoch, record.dev_strict_f1):
            best_params = {k: v.copy() for k, v in model.params.items()}
            history.best_epoch = epoch
        if stopper.stop:
            break
    model.params.update(best_params)
    return model, history


# -- gradient verification ------------------------------------------------------------

TINY_CONFIG = NetworkConfig(
    lstm_units=3, lstm_layers=2, dropout_input=0.5, dropout_recurrent=0.5,
    char_emb_dim=3, char_filters=3, char_filter_width=3, n_labels=15, word_dim=4,
)


def tiny_problem(config: NetworkConfig, seed: int):
    """A random small model plus a two-sentence batch and fixed dropout masks."""
    from .corpus import EventClass

    rng = np.random.default_rng(seed)
    batch = [
        Sentence((Token("Marco"), Token("pensa"), Token("di"), Token("andare")),
                 (EventSpan(1, 1, EventClass.I_STATE), EventSpan(3, 3, EventClass.OCCURRENCE))),
        Sentence((Token("fa"), Token("le"), Token("valigie")),
                 (EventSpan(0, 2, EventClass.OCCURRENCE),)),
    ]
    words = sorted({w.lower() for s in batch for w in s.surfaces} - {"di"})
    table = EmbeddingTable.from_dict({w: rng.normal(size=config.word_dim) for w in words})
    vocab = build_char_vocab(Corpus(tuple(batch)))
    model = init_model(config, vocab, table, rng)
    # move everything off the default init so no gradient is trivially zero
    for k, p in model.params.items():
        p += rng.normal(scale=0.3, size=p.shape)
    masks = sample_dropout_masks(config, len(batch), rng)
    return model, batch, masks


def grad_check(config: NetworkConfig | None = None, seed: int = 0, h: float = 1e-5,
               floor: float = 1e-5) -> float:
    """Largest relative error between ``backward`` and central differences.

    Relative error is ``|a - n| / max(|a|, |n|, floor)``; the floor keeps
    entries whose true gradient is ~0 from dividing noise by noise.
    """
    config = config or TINY_CONFIG
    model, batch, masks = tiny_problem(config, seed)
    analytic = backward(model, batch, masks)
    worst = 0.0
    for name, p in model.params.items():
        flat = p.reshape(-1)
        a_flat = analytic[name].reshape(-1)
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + h
            up = batch_loss(model, batch, masks)
            flat[i] = orig - h
            down = batch_loss(model, batch, masks)
            flat[i] = orig
            num = (up - down) / (2 * h)
            err = abs(a_flat[i] - num) / max(abs(a_flat[i]), abs(num), floor)
            worst = max(worst, err)
    return worst
