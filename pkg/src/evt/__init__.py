"""Joint event detection and classification with a char-CNN BiLSTM-CRF tagger."""
from .corpus import (
    Corpus, EventClass, EventSpan, Sentence, Token, corpus_stats, decode_bio, encode_bio,
    label_alphabet, read_column_file, write_column_file,
)
from .embeddings import EmbeddingTable, build_char_vocab, load_text_vectors, lookup, oov_rate
from .evaluation import class_confusion, match_spans, mcnemar, pos_breakdown, score
from .network import NetworkConfig, TaggerModel, predict
from .synthetic import generate_synthetic_corpus, synthetic_splits
from .training import TrainConfig, grad_check, train

__version__ = "0.1.0"
