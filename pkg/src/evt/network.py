"""Char-CNN + 2-layer BiLSTM + CRF tagger, forward and backward passes in numpy.

Shapes used throughout: B sentences per batch, T = longest sentence, D input
width, H = ``lstm_units``, L = ``n_labels``. Sentences shorter than T are
padded at the end. Backward-direction LSTMs read each sentence reversed
within its own length, so padding always trails the real tokens and never
influences them.

LSTM gate blocks are stacked in the order [input, forget, cell, output] along
the 4H axis, and the initial state is zero.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass, field, fields

import numpy as np

from .corpus import (
    Corpus, EventSpan, Sentence, decode_bio, encode_bio, ids_to_tags, label_alphabet, tags_to_ids,
)
from .crf import CrfParams, crf_nll, crf_nll_and_grads, viterbi_decode
from .embeddings import CharVocab, EmbeddingTable, lookup

DIRECTIONS = ("fw", "bw")


@dataclass
class NetworkConfig:
    lstm_units: int = 100
    lstm_layers: int = 2
    dropout_input: float = 0.5
    dropout_recurrent: float = 0.5
    char_emb_dim: int = 30
    char_filters: int = 30
    char_filter_width: int = 3
    n_labels: int = 15
    word_dim: int = 0

    def validate(self) -> "NetworkConfig":
        for name in ("lstm_units", "lstm_layers", "char_emb_dim", "char_filters",
                     "char_filter_width", "n_labels", "word_dim"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.char_filter_width % 2 != 1:
            raise ValueError("char_filter_width must be odd")
        for name in ("dropout_input", "dropout_recurrent"):
            if not 0.0 <= getattr(self, name) < 1.0:
                raise ValueError(f"{name} must be in [0, 1)")
        return self

    @property
    def input_dim(self) -> int:
        return self.word_dim + self.char_filters

    def layer_input_dim(self, layer: int) -> int:
        return self.input_dim if layer == 0 else 2 * self.lstm_units

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def field_names(cls) -> list[str]:
        return [f.name for f in fields(cls)]


@dataclass
class CharCnnParams:
    char_embeddings: np.ndarray  # (V, E)
    filters: np.ndarray  # (F, width, E)
    filter_bias: np.ndarray  # (F,)


@dataclass
class LstmParams:
    W: np.ndarray  # (4H, D)
    U: np.ndarray  # (4H, H)
    b: np.ndarray  # (4H,)


def param_shapes(config: NetworkConfig, n_chars: int) -> dict[str, tuple[int, ...]]:
    """Names and shapes of all trainable tensors, in serialization order."""
    H, L = config.lstm_units, config.n_labels
    shapes = {
        "char.embeddings": (n_chars, config.char_emb_dim),
        "char.filters": (config.char_filters, config.char_filter_width, config.char_emb_dim),
        "char.bias": (config.char_filters,),
    }
    for layer in range(config.lstm_layers):
        D = config.layer_input_dim(layer)
        for d in DIRECTIONS:
            shapes[f"lstm{layer}.{d}.W"] = (4 * H, D)
            shapes[f"lstm{layer}.{d}.U"] = (4 * H, H)
            shapes[f"lstm{layer}.{d}.b"] = (4 * H,)
    shapes.update({
        "proj.W": (L, 2 * H),
        "proj.b": (L,),
        "crf.transitions": (L, L),
        "crf.start": (L,),
        "crf.end": (L,),
    })
    return shapes


@dataclass
class TaggerModel:
    config: NetworkConfig
    params: dict[str, np.ndarray]
    char_vocab: CharVocab
    embeddings: EmbeddingTable
    labels: tuple[str, ...] = field(default_factory=lambda: tuple(label_alphabet()))
    vectors_path: str = ""

    def __post_init__(self):
        if len(self.labels) != self.config.n_labels:
            raise ValueError("label alphabet size does not match n_labels")
        expected = param_shapes(self.config, len(self.char_vocab))
        if list(expected) != list(self.params):
            raise ValueError("parameter names do not match the configuration")
        for name, shape in expected.items():
            if self.params[name].shape != shape:
                raise ValueError(f"{name}: expected shape {shape}, got {self.params[name].shape}")

    @property
    def char_cnn(self) -> CharCnnParams:
        p = self.params
        return CharCnnParams(p["char.embeddings"], p["char.filters"], p["char.bias"])

    def lstm(self, layer: int, direction: str) -> LstmParams:
        p = self.params
        key = f"lstm{layer}.{direction}"
        return LstmParams(p[key + ".W"], p[key + ".U"], p[key + ".b"])

    @property
    def crf(self) -> CrfParams:
        p = self.params
        return CrfParams(p["crf.transitions"], p["crf.start"], p["crf.end"])

    @property
    def n_parameters(self) -> int:
        return sum(v.size for v in self.params.values())

    def copy(self) -> "TaggerModel":
        return TaggerModel(
            self.config, {k: v.copy() for k, v in self.params.items()},
            self.char_vocab, self.embeddings, self.labels, self.vectors_path,
        )


def _glorot(rng: np.random.Generator, shape, fan_in: int, fan_out: int) -> np.ndarray:
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=shape)


def init_model(config: NetworkConfig, char_vocab: CharVocab, embeddings: EmbeddingTable,
               rng: np.random.Generator, vectors_path: str = "") -> TaggerModel:
    """Glorot-uniform weights, zero biases (forget gate 1.0), zero CRF scores."""
    config.validate()
    if config.word_dim != embeddings.dim:
        raise ValueError(f"word_dim {config.word_dim} != embedding dim {embeddings.dim}")
    H = config.lstm_units
    params = {}
    for name, shape in param_shapes(config, len(char_vocab)).items():
        if name == "char.filters":
            F, w, E = shape
            params[name] = _glorot(rng, shape, w * E, w * F)
        elif name.startswith("crf.") or len(shape) == 1:
            params[name] = np.zeros(shape)
        else:
            params[name] = _glorot(rng, shape, shape[1], shape[0])
        if name.endswith(".b") and name.startswith("lstm"):
            params[name][H : 2 * H] = 1.0
    return TaggerModel(config, params, char_vocab, embeddings, tuple(label_alphabet()), vectors_path)


def _sigmoid(x):
    return 0.5 * (1.0 + np.tanh(0.5 * x))


# -- character CNN ----------------------------------------------------------------


def char_cnn_batch(words: list[list[int]], cnn: CharCnnParams):
    """Max-pooled tanh convolutions for a list of char-id words -> (N, F)."""
    F, width, E = cnn.filters.shape
    pad = (width - 1) // 2
    lens = np.array([len(w) for w in words])
    if lens.size and lens.min() == 0:
        raise ValueError("cannot encode an empty word")
    N, longest = len(words), int(lens.max()) if len(words) else 0
    ids = np.zeros((N, longest + 2 * pad), dtype=np.int64)
    for n, w in enumerate(words):
        ids[n, pad : pad + len(w)] = w
    emb = cnn.char_embeddings[ids]
    windows = np.stack([emb[:, k : k + longest] for k in range(width)], axis=2)
    windows = windows.reshape(N, longest, width * E)
    flat_filters = cnn.filters.reshape(F, width * E)
    act = np.tanh(windows @ flat_filters.T + cnn.filter_bias)
    valid = np.arange(longest)[None, :] < lens[:, None]
    arg = np.argmax(np.where(valid[:, :, None], act, -np.inf), axis=1)
    out = np.take_along_axis(act, arg[:, None, :], axis=1)[:, 0, :]
    return out, (ids, windows, act, arg)


def char_cnn_backward(d_out: np.ndarray, cnn: CharCnnParams, cache):
    ids, windows, act, arg = cache
    F, width, E = cnn.filters.shape
    N, longest, _ = act.shape
    d_act = np.zeros_like(act)
    np.put_along_axis(d_act, arg[:, None, :], d_out[:, None, :], axis=1)
    d_z = d_act * (1.0 - act**2)
    d_filters = np.einsum("nlf,nlk->fk", d_z, windows).reshape(F, width, E)
    d_bias = d_z.sum(axis=(0, 1))
    d_windows = (d_z @ cnn.filters.reshape(F, width * E)).reshape(N, longest, width, E)
    d_emb_seq = np.zeros((N, ids.shape[1], E))
    for k in range(width):
        d_emb_seq[:, k : k + longest] += d_windows[:, :, k]
    d_char_emb = np.zeros_like(cnn.char_embeddings)
    np.add.at(d_char_emb, ids.ravel(), d_emb_seq.reshape(-1, E))
    return CharCnnParams(d_char_emb, d_filters, d_bias)


def char_cnn_forward(word_chars, params: CharCnnParams) -> np.ndarray:
    if len(word_chars) == 0:
        raise ValueError("cannot encode an empty word")
    return char_cnn_batch([list(word_chars)], params)[0][0]


# -- LSTM -------------------------------------------------------------------------


def lstm_scan(X: np.ndarray, p: LstmParams, in_mask=None, rec_mask=None):
    """Left-to-right LSTM over (B, T, D) inputs -> (B, T, H) hidden states.

    ``in_mask`` (B, D) and ``rec_mask`` (B, H) are per-sequence dropout masks
    reused at every step.
    """
    B, T, _ = X.shape
    H = p.U.shape[1]
    Xd = X * in_mask[:, None, :] if in_mask is not None else X
    XW = Xd @ p.W.T + p.b
    h = np.zeros((B, H))
    c = np.zeros((B, H))
    hs = np.empty((B, T, H))
    steps = []
    for t in range(T):
        hr = h * rec_mask if rec_mask is not None else h
        z = XW[:, t] + hr @ p.U.T
        i = _sigmoid(z[:, :H])
        f = _sigmoid(z[:, H : 2 * H])
        g = np.tanh(z[:, 2 * H : 3 * H])
        o = _sigmoid(z[:, 3 * H :])
        c_prev = c
        c = f * c_prev + i * g
        tc = np.tanh(c)
        h = o * tc
        hs[:, t] = h
        steps.append((i, f, g, o, c_prev, tc, hr))
    return hs, (Xd, steps, in_mask, rec_mask)


def lstm_scan_backward(d_hs: np.ndarray, p: LstmParams, cache):
    Xd, steps, in_mask, rec_mask = cache
    B, T, H = d_hs.shape
    d_xw = np.empty((B, T, 4 * H))
    dU = np.zeros_like(p.U)
    dh_next = np.zeros((B, H))
    dc_next = np.zeros((B, H))
    for t in range(T - 1, -1, -1):
        i, f, g, o, c_prev, tc, hr = steps[t]
        dh = d_hs[:, t] + dh_next
        do = dh * tc
        dc = dc_next + dh * o * (1.0 - tc**2)
        dz = np.concatenate(
            [dc * g * i * (1.0 - i), dc * c_prev * f * (1.0 - f), dc * i * (1.0 - g**2),
             do * o * (1.0 - o)],
            axis=1,
        )
        d_xw[:, t] = dz
        dU += dz.T @ hr
        dh_next = dz @ p.U
        if rec_mask is not None:
            dh_next = dh_next * rec_mask
        dc_next = dc * f
    dW = np.einsum("btg,btd->gd", d_xw, Xd)
    db = d_xw.sum(axis=(0, 1))
    dX = d_xw @ p.W
    if in_mask is not None:
        dX = dX * in_mask[:, None, :]
    return dX, LstmParams(dW, dU, db)


def reverse_within(X: np.ndarray, lengths: np.ndarray) -> np.ndarray:
    """Reverse each row's first ``lengths[b]`` steps, leaving padding in place."""
    B, T = X.shape[:2]
    t = np.arange(T)[None, :]
    idx = np.where(t < lengths[:, None], lengths[:, None] - 1 - t, t)
    return X[np.arange(B)[:, None], idx]


def lstm_direction_forward(inputs: np.ndarray, params: LstmParams, direction: str = "fw",
                           in_mask=None, rec_mask=None) -> np.ndarray:
    """Hidden states (T, H) for a single sequence (T, D)."""
    X = np.asarray(inputs, dtype=np.float64)[None]
    lengths = np.array([X.shape[1]])
    in_mask = None if in_mask is None else np.atleast_2d(in_mask)
    rec_mask = None if rec_mask is None else np.atleast_2d(rec_mask)
    if direction == "bw":
        X = reverse_within(X, lengths)
    hs, _ = lstm_scan(X, params, in_mask, rec_mask)
    if direction == "bw":
        hs = reverse_within(hs, lengths)
    return hs[0]


def sample_dropout_masks(config: NetworkConfig, batch_size: int, rng: np.random.Generator):
    """Inverted-dropout masks keyed by ``(layer, direction)`` -> (input, recurrent)."""
    def mask(rate, shape):
        return (rng.random(shape) >= rate) / (1.0 - rate)

    masks = {}
    for layer in range(config.lstm_layers):
        D = config.layer_input_dim(layer)
        for d in DIRECTIONS:
            masks[(layer, d)] = (
                mask(config.dropout_input, (batch_size, D)),
                mask(config.dropout_recurrent, (batch_size, config.lstm_units)),
            )
    return masks


def _bilstm_batch(X, lengths, model: TaggerModel, masks):
    inp = X
    caches = []
    for layer in range(model.config.lstm_layers):
        outs = []
        layer_caches = []
        for d in DIRECTIONS:
            x = inp if d == "fw" else reverse_within(inp, lengths)
            in_mask, rec_mask = masks[(layer, d)] if masks is not None else (None, None)
            hs, cache = lstm_scan(x, model.lstm(layer, d), in_mask, rec_mask)
            if d == "bw":
                hs = reverse_within(hs, lengths)
            outs.append(hs)
            layer_caches.append(cache)
        inp = np.concatenate(outs, axis=2)
        caches.append(layer_caches)
    return inp, caches


def _bilstm_batch_backward(d_out, lengths, model: TaggerModel, caches, grads):
    H = model.config.lstm_units
    for layer in range(model.config.lstm_layers - 1, -1, -1):
        d_inp = 0.0
        for k, d in enumerate(DIRECTIONS):
            d_hs = d_out[:, :, k * H : (k + 1) * H]
            if d == "bw":
                d_hs = reverse_within(d_hs, lengths)
            dX, g = lstm_scan_backward(d_hs, model.lstm(layer, d), caches[layer][k])
            if d == "bw":
                dX = reverse_within(dX, lengths)
            d_inp = d_inp + dX
            key = f"lstm{layer}.{d}"
            grads[key + ".W"] += g.W
            grads[key + ".U"] += g.U
            grads[key + ".b"] += g.b
        d_out = d_inp
    return d_out


def bilstm_stack_forward(inputs: np.ndarray, model: TaggerModel, train_mode: bool = False,
                         dropout_masks=None) -> np.ndarray:
    """Stacked BiLSTM over one sentence's word representations -> (T, 2H).

    In train mode ``dropout_masks`` maps ``(layer, direction)`` to an
    ``(input_mask, recurrent_mask)`` pair; in eval mode it is ignored.
    """
    X = np.asarray(inputs, dtype=np.float64)[None]
    masks = _single_masks(dropout_masks) if train_mode else None
    if train_mode and masks is None:
        raise ValueError("train mode needs dropout masks")
    out, _ = _bilstm_batch(X, np.array([X.shape[1]]), model, masks)
    return out[0]


def _single_masks(masks):
    if masks is None:
        return None
    return {k: (np.atleast_2d(a), np.atleast_2d(b)) for k, (a, b) in masks.items()}


# -- full model ---------------------------------------------------------------------


def word_representations(sentences, model: TaggerModel):
    """Frozen word vectors and char-CNN features, concatenated -> (B, T, Dw + F)."""
    lengths = np.array([len(s) for s in sentences])
    B, T = len(sentences), int(lengths.max())
    words = np.zeros((B, T, model.config.word_dim))
    char_ids = []
    for b, sentence in enumerate(sentences):
        for t, surface in enumerate(sentence.surfaces):
            words[b, t] = lookup(model.embeddings, surface)
            char_ids.append(model.char_vocab.encode(surface))
    feats, cnn_cache = char_cnn_batch(char_ids, model.char_cnn)
    chars = np.zeros((B, T, model.config.char_filters))
    valid = np.arange(T)[None, :] < lengths[:, None]
    chars[valid] = feats
    return np.concatenate([words, chars], axis=2), lengths, (valid, cnn_cache)


def batch_emissions(sentences, model: TaggerModel, masks=None):
    """Emission scores (B, T, L) for a batch; rows past a sentence's length are junk."""
    X, lengths, rep_cache = word_representations(sentences, model)
    hidden, lstm_caches = _bilstm_batch(X, lengths, model, masks)
    scores = hidden @ model.params["proj.W"].T + model.params["proj.b"]
    return scores, lengths, (X, rep_cache, hidden, lstm_caches)


def emissions(sentence: Sentence, model: TaggerModel, train_mode: bool = False,
              masks=None) -> np.ndarray:
    if len(sentence) == 0:
        raise ValueError("cannot score an empty sentence")
    if train_mode and masks is None:
        raise ValueError("train mode needs dropout masks")
    scores, _, _ = batch_emissions([sentence], model, _single_masks(masks) if train_mode else None)
    return scores[0]


def loss_and_grads(model: TaggerModel, batch, masks=None):
    """Mean CRF negative log-likelihood over ``batch`` and its exact gradients."""
    if not batch:
        raise ValueError("empty batch")
    B = len(batch)
    scores, lengths, (X, (valid, cnn_cache), hidden, lstm_caches) = batch_emissions(
        batch, model, masks)
    grads = {k: np.zeros_like(v) for k, v in model.params.items()}
    d_scores = np.zeros_like(scores)
    crf = model.crf
    total = 0.0
    for b, sentence in enumerate(batch):
        T = lengths[b]
        gold = tags_to_ids(encode_bio(sentence))
        nll, d_em, d_crf = crf_nll_and_grads(scores[b, :T], crf, gold)
        total += nll
        d_scores[b, :T] = d_em / B
        grads["crf.transitions"] += d_crf.transitions / B
        grads["crf.start"] += d_crf.start_scores / B
        grads["crf.end"] += d_crf.end_scores / B
    grads["proj.W"] += np.einsum("btl,bth->lh", d_scores, hidden)
    grads["proj.b"] += d_scores.sum(axis=(0, 1))
    d_hidden = d_scores @ model.params["proj.W"]
    d_X = _bilstm_batch_backward(d_hidden, lengths, model, lstm_caches, grads)
    d_chars = d_X[:, :, model.config.word_dim :][valid]
    g = char_cnn_backward(d_chars, model.char_cnn, cnn_cache)
    grads["char.embeddings"] += g.char_embeddings
    grads["char.filters"] += g.filters
    grads["char.bias"] += g.filter_bias
    return total / B, grads


def batch_loss(model: TaggerModel, batch, masks=None) -> float:
    """Mean NLL without gradients (used by finite-difference checks)."""
    scores, lengths, _ = batch_emissions(batch, model, masks)
    total = sum(
        crf_nll(scores[b, : lengths[b]], model.crf, tags_to_ids(encode_bio(s)))
        for b, s in enumerate(batch)
    )
    return total / len(batch)


def predict(sentence: Sentence, model: TaggerModel) -> list[EventSpan]:
    return decode_bio(ids_to_tags(viterbi_decode(emissions(sentence, model), model.crf)))


def predict_tags(sentences, model: TaggerModel, batch_size: int = 32) -> list[list[str]]:
    """Viterbi tag strings for many sentences, run in eval-mode batches."""
    out: list[list[str]] = [[] for _ in sentences]
    todo = [i for i, s in enumerate(sentences) if len(s)]
    crf = model.crf
    for k in range(0, len(todo), batch_size):
        chunk = todo[k : k + batch_size]
        scores, lengths, _ = batch_emissions([sentences[i] for i in chunk], model)
        for b, i in enumerate(chunk):
            out[i] = ids_to_tags(viterbi_decode(scores[b, : lengths[b]], crf))
    return out


def tag_corpus(corpus: Corpus, model: TaggerModel, batch_size: int = 32) -> Corpus:
    """A copy of ``corpus`` whose events are the model's predictions."""
    tags = predict_tags(corpus.sentences, model, batch_size)
    return Corpus(
        tuple(Sentence(s.tokens, tuple(decode_bio(t))) for s, t in zip(corpus, tags)),
        corpus.split_name,
    )
