"""Train on the seeded synthetic corpus and report dev/test scores.

    python3 scripts/run_synthetic_experiment.py --out runs/synthetic
"""
import argparse
import time
from pathlib import Path

from evt.embeddings import EmbeddingTable
from evt.evaluation import format_kv, format_table, parse_kv, score
from evt.modelio import save_model
from evt.network import NetworkConfig, tag_corpus
from evt.plot import render_svg
from evt.synthetic import random_vectors, synthetic_splits, template_vocabulary
from evt.training import TrainConfig, train


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default="runs/synthetic")
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--dim", type=int, default=50)
    ap.add_argument("--max-epochs", type=int, default=30)
    args = ap.parse_args()

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    train_c, dev_c, test_c = synthetic_splits(args.seed)
    table = EmbeddingTable.from_dict(random_vectors(template_vocabulary(), args.dim, args.seed))

    t0 = time.perf_counter()
    model, history = train(train_c, dev_c, table, NetworkConfig(),
                           TrainConfig(seed=args.seed, max_epochs=args.max_epochs),
                           on_epoch=lambda r: print(r.log_line(), flush=True))
    print(f"trained in {time.perf_counter() - t0:.1f}s, best epoch {history.best_epoch}")
    save_model(model, out / "model.bin")
    (out / "history.log").write_text(history.to_text())

    kvs = []
    for name, corpus in (("dev", dev_c), ("test", test_c)):
        report = score(corpus, tag_corpus(corpus, model))
        print(format_table(report, name))
        (out / f"{name}.kv").write_text(format_kv(report))
        kvs.append(parse_kv(format_kv(report)))
    (out / "scores.svg").write_text(render_svg(kvs, ["dev", "test"]))


if __name__ == "__main__":
    main()
