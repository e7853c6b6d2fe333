"""Train one tagger per embedding file on a column-format split and compare them.

Prints the score table, POS recall and class error shares per system, plus
pairwise McNemar tests, and writes kv reports and a bar chart.

    python3 scripts/compare_embeddings.py --data DIR --vectors a=fasttext.vec b=dh.vec --out runs/cmp
"""
import argparse
import itertools
from pathlib import Path

from evt.corpus import load_corpus
from evt.embeddings import load_vectors, oov_rate
from evt.evaluation import (
    class_confusion, format_kv, format_table, mcnemar, parse_kv, pos_breakdown, score,
)
from evt.modelio import save_model
from evt.network import NetworkConfig, tag_corpus
from evt.plot import render_svg
from evt.training import TrainConfig, parse_config, train


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--data", required=True, help="directory with train.tsv, dev.tsv, test.tsv")
    ap.add_argument("--vectors", nargs="+", required=True, metavar="LABEL=PATH")
    ap.add_argument("--config")
    ap.add_argument("--out", default="runs/compare")
    args = ap.parse_args()

    data, out = Path(args.data), Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    train_c, dev_c, test_c = (load_corpus(data / f"{s}.tsv", s) for s in ("train", "dev", "test"))
    net, tcfg = NetworkConfig(), TrainConfig()
    if args.config:
        with open(args.config) as fh:
            net, tcfg = parse_config(fh)

    outputs, kvs = {}, []
    for item in args.vectors:
        label, path = item.split("=", 1)
        table = load_vectors(path)
        for corpus in (train_c, dev_c, test_c):
            r = oov_rate(corpus, table)
            print(f"{label} {corpus.split_name}: token OOV {r.token_oov_rate:.2f}% "
                  f"type OOV {r.type_oov_rate:.2f}%")
        model, history = train(train_c, dev_c, table, net, tcfg, vectors_path=str(Path(path).resolve()))
        save_model(model, out / f"{label}.bin")
        system = tag_corpus(test_c, model)
        outputs[label] = system
        report = score(test_c, system)
        print(format_table(report, label))
        (out / f"{label}.kv").write_text(format_kv(report))
        kvs.append(parse_kv(format_kv(report)))
        pb = pos_breakdown(test_c, system)
        print("  POS recall: " + ", ".join(f"{p} {v:.2f}%" for p, v in sorted(pb.recall.items())))
        share = class_confusion(test_c, system).error_share()
        print("  class error share: " + ", ".join(f"{c} {v:.2f}%" for c, v in share.items()))

    for a, b in itertools.combinations(outputs, 2):
        for mode in ("strict", "relaxed"):
            m = mcnemar(outputs[a], outputs[b], test_c, mode)
            print(f"McNemar {a} vs {b} ({mode}): b={m.b} c={m.c} chi2={m.chi2:.3f} "
                  f"p={m.p_value:.4f} significant={m.significant_at_005}")
    (out / "scores.svg").write_text(render_svg(kvs, list(outputs)))


if __name__ == "__main__":
    main()
