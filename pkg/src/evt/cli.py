"""``evt`` command line: convert, train, tag, score, embstats, plot.

Exit status: 0 success, 1 usage error, 2 data or format error.
"""
from __future__ import annotations

import argparse
import io
import logging
import os
import sys
import tempfile
from pathlib import Path

from .corpus import ColumnFormatError, Corpus, InvalidAnnotationError, load_corpus, write_column_file
from .embeddings import VectorFormatError, load_vectors, oov_rate, sniff_header, write_text_vectors
from .evaluation import AlignmentError, format_kv, format_table, parse_kv, score
from .modelio import ModelFormatError, dump_model, open_model
from .network import NetworkConfig, tag_corpus
from .plot import render_svg
from .synthetic import generate_synthetic_corpus, random_vectors, template_vocabulary
from .training import ConfigError, TrainConfig, parse_config, train

log = logging.getLogger("evt")

OK, USAGE, DATA = 0, 1, 2


class UsageError(Exception):
    pass


class DataError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _atomic_write(path, data, mode="w"):
    """Write to a sibling temp file, then rename, so failures leave no partial output."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.")
    try:
        if mode == "wb":
            with os.fdopen(fd, "wb") as fh:
                fh.write(data)
        else:
            with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _corpus_text(corpus: Corpus) -> str:
    buf = io.StringIO()
    write_column_file(corpus, buf)
    return buf.getvalue()


def _need(args, *names):
    missing = [f"--{n.replace('_', '-')}" for n in names if getattr(args, n) is None]
    if missing:
        raise UsageError(f"{args.command} needs {', '.join(missing)}")


def _read_corpus(path, split=None) -> Corpus:
    if not Path(path).is_file():
        raise DataError(f"no such file: {path}")
    return load_corpus(path, split)


def cmd_convert(args) -> int:
    _need(args, "out")
    if args.synthetic is not None:
        if args.synthetic < 0:
            raise UsageError("--synthetic must be >= 0")
        corpus = generate_synthetic_corpus(args.seed, args.synthetic)
        if args.vectors:
            buf = io.StringIO()
            write_text_vectors(random_vectors(template_vocabulary(), args.dim, args.seed), buf)
            _atomic_write(args.vectors, buf.getvalue())
    else:
        _need(args, "input")
        corpus = _read_corpus(args.input)
    _atomic_write(args.out, _corpus_text(corpus))
    return OK


def cmd_train(args) -> int:
    _need(args, "train", "dev", "vectors", "model")
    net, tcfg = NetworkConfig(), TrainConfig()
    if args.config:
        if not Path(args.config).is_file():
            raise DataError(f"no such file: {args.config}")
        with open(args.config, encoding="utf-8") as fh:
            net, tcfg = parse_config(fh)
    if args.seed is not None:
        tcfg.seed = args.seed
    if not Path(args.vectors).is_file():
        raise DataError(f"no such file: {args.vectors}")
    train_c = _read_corpus(args.train, "train")
    dev_c = _read_corpus(args.dev, "dev")
    has_header = sniff_header(args.vectors)
    vectors = load_vectors(args.vectors, has_header)
    if net.word_dim and net.word_dim != vectors.dim:
        raise DataError(f"config word_dim {net.word_dim} != vectors dim {vectors.dim}")
    model, history = train(
        train_c, dev_c, vectors, net, tcfg,
        vectors_path=str(Path(args.vectors).resolve()),
        on_epoch=lambda r: print(r.log_line(), file=sys.stderr),
    )
    buf = io.BytesIO()
    dump_model(model, buf, has_header)
    _atomic_write(args.model, buf.getvalue(), "wb")
    _atomic_write(args.out or f"{args.model}.log", history.to_text())
    return OK


def cmd_tag(args) -> int:
    _need(args, "model", "input", "out")
    if not Path(args.model).is_file():
        raise DataError(f"no such file: {args.model}")
    corpus = _read_corpus(args.input)
    model = open_model(args.model)
    _atomic_write(args.out, _corpus_text(tag_corpus(corpus, model)))
    return OK


def cmd_score(args) -> int:
    _need(args, "gold", "input")
    gold = _read_corpus(args.gold, "gold")
    system = _read_corpus(args.input, "system")
    try:
        report = score(gold, system)
    except AlignmentError as err:
        raise DataError(f"misaligned files: {err}") from None
    text = format_table(report, Path(args.input).stem) if args.format == "table" else format_kv(report)
    if args.out:
        _atomic_write(args.out, text)
    else:
        sys.stdout.write(text)
    return OK


def cmd_embstats(args) -> int:
    _need(args, "vectors")
    paths = [p for p in (args.train, args.dev, args.test) if p] + list(args.corpora)
    if not paths:
        raise UsageError("embstats needs at least one corpus")
    if not Path(args.vectors).is_file():
        raise DataError(f"no such file: {args.vectors}")
    table = load_vectors(args.vectors)
    lines = ["split\ttokens\ttypes\ttoken_oov%\ttype_oov%"]
    for path in paths:
        r = oov_rate(_read_corpus(path), table)
        lines.append(f"{path}\t{r.n_tokens}\t{r.n_types}\t{r.token_oov_rate:.2f}%\t{r.type_oov_rate:.2f}%")
    text = "\n".join(lines) + "\n"
    if args.out:
        _atomic_write(args.out, text)
    else:
        sys.stdout.write(text)
    return OK


def cmd_plot(args) -> int:
    _need(args, "out")
    if not args.inputs:
        raise UsageError("plot needs at least one --in report")
    labels = args.labels or []
    if len(labels) != len(args.inputs):
        raise UsageError(f"{len(args.inputs)} reports but {len(labels)} labels")
    reports = []
    for path in args.inputs:
        if not Path(path).is_file():
            raise DataError(f"no such file: {path}")
        try:
            reports.append(parse_kv(Path(path).read_text(encoding="utf-8")))
        except ValueError as err:
            raise DataError(f"{path}: {err}") from None
    try:
        svg = render_svg(reports, labels)
    except KeyError as err:
        raise DataError(f"report lacks metric {err.args[0]}") from None
    _atomic_write(args.out, svg)
    return OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="evt", description="BiLSTM-CRF event detection and classification")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("convert", help="normalise a column file or write a synthetic corpus")
    p.add_argument("--in", dest="input")
    p.add_argument("--out")
    p.add_argument("--synthetic", type=int, metavar="N", help="generate N synthetic sentences")
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--vectors", help="with --synthetic: also write random template vectors here")
    p.add_argument("--dim", type=int, default=50)
    p.set_defaults(func=cmd_convert)

    p = sub.add_parser("train", help="train a tagger")
    for flag in ("train", "dev", "vectors", "config", "model"):
        p.add_argument(f"--{flag}")
    p.add_argument("--out", help="training history log (default: MODEL.log)")
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("tag", help="tag a column file with a trained model")
    p.add_argument("--model")
    p.add_argument("--in", dest="input")
    p.add_argument("--out")
    p.set_defaults(func=cmd_tag)

    p = sub.add_parser("score", help="score system output against gold")
    p.add_argument("--gold", "--test", dest="gold")
    p.add_argument("--in", dest="input")
    p.add_argument("--format", choices=("table", "kv"), default="table")
    p.add_argument("--out")
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("embstats", help="OOV rates of corpora against a vector file")
    p.add_argument("--vectors")
    p.add_argument("--train")
    p.add_argument("--dev")
    p.add_argument("--test")
    p.add_argument("--out")
    p.add_argument("corpora", nargs="*")
    p.set_defaults(func=cmd_embstats)

    p = sub.add_parser("plot", help="SVG bar chart of F1 / F1-class from kv reports")
    p.add_argument("--in", dest="inputs", action="append")
    p.add_argument("--label", dest="labels", action="append")
    p.add_argument("--out")
    p.set_defaults(func=cmd_plot)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError("missing subcommand")
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                            format="%(levelname)s %(name)s: %(message)s")
        return args.func(args)
    except UsageError as err:
        print(f"evt: usage error: {err}", file=sys.stderr)
        return USAGE
    except (DataError, ColumnFormatError, VectorFormatError, ModelFormatError, ConfigError,
            InvalidAnnotationError, OSError) as err:
        print(f"evt: error: {err}", file=sys.stderr)
        return DATA


if __name__ == "__main__":
    sys.exit(main())
