"""Command-line entry point: prepare, train, eval, score, export, inspect-weights."""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import scoring
from .evaluator import evaluate
from .kg_store import KgDataset, build_dataset, parse_triples
from .scoring import ModelConfig, build_model, load_checkpoint, save_checkpoint
from .trainer import TrainConfig, train, write_log
from .weights import RESTRICTIONS, DirichletRegConfig

log = logging.getLogger("mkge")


class CliError(Exception):
    pass


def _floats(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(x) for x in text.replace(" ", "").split(",") if x)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def read_config_file(path: str | Path) -> dict[str, str]:
    """Plain ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise CliError(f"{path}:{lineno}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key.replace("-", "_")] = value
    return out


# -- commands ----------------------------------------------------------------

def cmd_prepare(args) -> int:
    train_rows = parse_triples(args.train, args.columns)
    if not train_rows:
        raise CliError("no training triples")
    valid_rows = parse_triples(args.valid, args.columns) if args.valid else []
    test_rows = parse_triples(args.test, args.columns) if args.test else []
    ds = build_dataset(train_rows, valid_rows, test_rows)
    ds.save(args.out)
    print(f"entities\t{ds.num_entities}")
    print(f"relations\t{ds.num_relations}")
    print(f"train\t{len(ds.train)}")
    print(f"valid\t{len(ds.valid)}")
    print(f"test\t{len(ds.test)}")
    return 0


def model_config_from_args(args) -> ModelConfig:
    weights = args.weights
    n_e = args.n_entity_emb if args.n_entity_emb is not None else args.n_emb
    n_r = args.n_relation_emb if args.n_relation_emb is not None else args.n_emb
    kw = dict(dim=args.dim, n_e=n_e, n_r=n_r, seed=args.seed)
    if weights == "preset":
        if args.preset in ("custom", "learnable"):
            raise CliError(f"use --weights {args.preset} instead of --preset {args.preset}")
        return ModelConfig(preset=args.preset, **kw)
    if weights == "custom":
        if not args.omega:
            raise CliError("--weights custom needs --omega")
        return ModelConfig(preset="custom", omega=args.omega, **kw)
    if weights == "uniform":
        return ModelConfig(preset="uniform", **kw)
    return ModelConfig(preset="learnable", restriction=args.restriction, sparse=args.sparse, **kw)


def cmd_train(args) -> int:
    if not args.data or not args.out:
        raise CliError("train needs --data and --out (on the command line or in --config)")
    try:
        mcfg = model_config_from_args(args)
        tcfg = TrainConfig(learning_rate=args.lr, batch_size=args.batch_size, l2_lambda=args.l2,
                           negatives_per_positive=args.negatives, max_epochs=args.max_epochs,
                           eval_every=args.eval_every, patience_epochs=args.patience,
                           loss_form=args.loss, seed=args.seed,
                           valid_split=None if args.valid_split == "none" else args.valid_split)
        dcfg = DirichletRegConfig(alpha=args.dirichlet_alpha, lambda_dir=args.dirichlet_lambda,
                                  enabled=args.sparse, lambda_l1=args.l1_omega)
    except ValueError as exc:
        raise CliError(f"inconsistent configuration: {exc}") from None
    ds = KgDataset.load(args.data)
    model = build_model(mcfg, ds.num_entities, ds.num_relations)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    log_path = out / "train_log.tsv"
    entries = []

    def on_log(entry):
        entries.append(entry)
        if entry.valid_mrr is not None:
            print(f"epoch {entry.epoch}\tloss {entry.train_loss:.6f}\tvalid MRR {entry.valid_mrr:.4f}",
                  flush=True)
            write_log(log_path, entries)

    result = train(ds, model, tcfg, dirichlet=dcfg, on_log=on_log)
    write_log(log_path, result.log)
    result.model.extra.update(train_config=asdict(tcfg), dirichlet=asdict(dcfg))
    result.final_model.extra.update(result.model.extra)
    save_checkpoint(result.model, out / "best")
    save_checkpoint(result.final_model, out / "final")
    if result.best_mrr is None:
        print("best valid MRR\tn/a")
    else:
        print(f"best valid MRR\t{result.best_mrr:.6f}\tepoch {result.best_epoch}")
    return 0


def _load_consistent(checkpoint, data) -> tuple[scoring.Model, KgDataset]:
    model = load_checkpoint(checkpoint)
    ds = KgDataset.load(data)
    if model.num_entities != ds.num_entities or model.num_relations != ds.num_relations:
        raise CliError(
            f"checkpoint has {model.num_entities} entities / {model.num_relations} relations "
            f"but dataset has {ds.num_entities} entities / {ds.num_relations} relations")
    return model, ds


def cmd_eval(args) -> int:
    model, ds = _load_consistent(args.checkpoint, args.data)
    report = evaluate(model, ds, args.split)
    if args.out:
        report.write(args.out)
    if args.dump_ranks:
        report.dump_ranks(args.dump_ranks, ds)
    for key, value in report.summary().items():
        print(f"{key}\t{value:.6f}" if isinstance(value, float) else f"{key}\t{value}")
    return 0


def cmd_score(args) -> int:
    model, ds = _load_consistent(args.checkpoint, args.data)
    try:
        t = (ds.entities.encode(args.head), ds.entities.encode(args.tail),
             ds.relations.encode(args.relation))
    except KeyError as exc:
        raise CliError(str(exc.args[0])) from None
    print(f"{scoring.score_triple(model.table, model.weights, t):.10g}")
    return 0


def cmd_export(args) -> int:
    model, ds = _load_consistent(args.checkpoint, args.data)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    ent, rel = scoring.export_concatenated(model.table)
    scoring.write_export(out / "entities.tsv", ds.entities.names, ent)
    scoring.write_export(out / "relations.tsv", ds.relations.names, rel)
    print(f"wrote {len(ent)} entity and {len(rel)} relation vectors of length "
          f"{ent.shape[1]} / {rel.shape[1]} to {out}")
    return 0


def cmd_inspect_weights(args) -> int:
    model = load_checkpoint(args.checkpoint)
    w = model.weights
    print(f"name\t{w.name}\nmode\t{w.mode}\nrestriction\t{w.restriction}")
    print("i\tj\tk\tomega" + ("\traw" if w.learnable else ""))
    omega = w.omega
    for flat, (i, j, k) in enumerate(np.ndindex(w.n_e, w.n_e, w.n_r)):
        line = f"{i + 1}\t{j + 1}\t{k + 1}\t{omega[flat]:.6g}"
        if w.learnable:
            line += f"\t{w.raw[flat]:.6g}"
        print(line)
    return 0


# -- parser ------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="mkge", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("prepare", help="encode raw triple files into a dataset directory")
    s.add_argument("--train", required=True)
    s.add_argument("--valid")
    s.add_argument("--test")
    s.add_argument("--columns", choices=("hrt", "htr"), default="hrt")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_prepare)

    s = sub.add_parser("train", help="train a multi-embedding model")
    s.add_argument("--config", help="key=value file supplying defaults for any flag below")
    s.add_argument("--data", help="directory written by 'prepare' (required)")
    s.add_argument("--out", help="output directory (required)")
    s.add_argument("--weights", choices=("preset", "custom", "uniform", "learnable"), default="preset")
    s.add_argument("--preset", choices=scoring.FIXED_PRESETS, default="complex")
    s.add_argument("--omega", type=_floats, help="comma-separated weights in (i,j,k) order")
    s.add_argument("--dim", type=int, default=200)
    s.add_argument("--n-emb", type=int, help="embeddings per entity and relation")
    s.add_argument("--n-entity-emb", type=int)
    s.add_argument("--n-relation-emb", type=int)
    s.add_argument("--restriction", choices=RESTRICTIONS, default="none")
    s.add_argument("--sparse", action="store_true", help="Dirichlet sparsity penalty on omega")
    s.add_argument("--dirichlet-alpha", type=float, default=1 / 16)
    s.add_argument("--dirichlet-lambda", type=float, default=1e-2)
    s.add_argument("--l1-omega", type=float, default=0.0)
    s.add_argument("--lr", type=float, default=1e-3)
    s.add_argument("--batch-size", type=int, default=2 ** 12)
    s.add_argument("--l2", type=float, default=1e-3)
    s.add_argument("--negatives", type=int, default=1)
    s.add_argument("--max-epochs", type=int, default=1000)
    s.add_argument("--eval-every", type=int, default=50)
    s.add_argument("--patience", type=int, default=100)
    s.add_argument("--loss", choices=("softplus", "cross_entropy"), default="softplus")
    s.add_argument("--valid-split", choices=("train", "valid", "test", "none"), default="valid",
                   help="split used for early stopping; 'none' trains for --max-epochs")
    s.add_argument("--seed", type=int, default=0)
    s.set_defaults(func=cmd_train)
    p.train_parser = s

    s = sub.add_parser("eval", help="filtered MRR / Hit@k on a split")
    s.add_argument("--checkpoint", required=True)
    s.add_argument("--data", required=True)
    s.add_argument("--split", choices=("train", "valid", "test"), default="test")
    s.add_argument("--out", help="report prefix; writes <prefix>.tsv and <prefix>.json")
    s.add_argument("--dump-ranks")
    s.set_defaults(func=cmd_eval)

    s = sub.add_parser("score", help="score one triple given by names")
    s.add_argument("--checkpoint", required=True)
    s.add_argument("--data", required=True)
    s.add_argument("--head", required=True)
    s.add_argument("--relation", required=True)
    s.add_argument("--tail", required=True)
    s.set_defaults(func=cmd_score)

    s = sub.add_parser("export", help="write concatenated embedding vectors as TSV")
    s.add_argument("--checkpoint", required=True)
    s.add_argument("--data", required=True)
    s.add_argument("--out", required=True, help="output directory")
    s.set_defaults(func=cmd_export)

    s = sub.add_parser("inspect-weights", help="print the weight vector of a checkpoint")
    s.add_argument("--checkpoint", required=True)
    s.set_defaults(func=cmd_inspect_weights)
    return p


def parse_args(argv=None) -> argparse.Namespace:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "config", None):
        values = read_config_file(args.config)
        train_parser = parser.train_parser
        known = {a.dest: a for a in train_parser._actions}
        defaults = {}
        for key, raw in values.items():
            action = known.get(key)
            if action is None or key in ("help", "config"):
                raise CliError(f"{args.config}: unknown key {key!r}")
            if action.nargs == 0:
                defaults[key] = raw.lower() in ("1", "true", "yes", "on")
            else:
                defaults[key] = action.type(raw) if action.type else raw
        train_parser.set_defaults(**defaults)
        args = parser.parse_args(argv)
    return args


def main(argv=None) -> int:
    try:
        args = parse_args(argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                            format="%(levelname)s %(name)s: %(message)s")
        return args.func(args)
    except (CliError, ValueError, KeyError, OSError) as exc:
        print(f"mkge: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
