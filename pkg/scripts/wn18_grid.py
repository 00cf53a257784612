#!/usr/bin/env python3
"""Grid search on WN18 through the mkge CLI.

Prepares the data once, then trains every (model, lr, l2, batch) point and
keeps the run with the best validation MRR per model. Pass --dry-run to print
the commands only. The full grid is 24 runs per model.
"""

import argparse
import itertools
import json
import shlex
import subprocess
from pathlib import Path

# name: extra train flags (dims keep parameter counts comparable)
MODELS = {
    "distmult": "--preset distmult --dim 400",
    "complex": "--preset complex --dim 200",
    "cp": "--preset cp --dim 200",
    "cph": "--preset cph --dim 200",
    "quaternion": "--preset quaternion --dim 100",
    "uniform": "--weights uniform --dim 200",
    "auto_softmax": "--weights learnable --restriction softmax --dim 200",
    "auto_softmax_sparse": "--weights learnable --restriction softmax --sparse --dim 200",
}
LRS = (1e-3, 1e-4)
L2S = (1e-2, 3e-3, 1e-3, 3e-4, 1e-4, 0.0)
BATCHES = (2 ** 12, 2 ** 14)


def run(cmd, dry):
    print("$", cmd, flush=True)
    if not dry:
        subprocess.run(shlex.split(cmd), check=True)


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--raw", required=True, help="directory with train/valid/test .txt in h r t order")
    p.add_argument("--out", default="runs/wn18")
    p.add_argument("--models", nargs="+", default=list(MODELS), choices=list(MODELS))
    p.add_argument("--max-epochs", type=int, default=1000)
    p.add_argument("--dry-run", action="store_true")
    args = p.parse_args()

    raw, out = Path(args.raw), Path(args.out)
    data = out / "data"
    run(f"mkge prepare --train {raw / 'train.txt'} --valid {raw / 'valid.txt'} "
        f"--test {raw / 'test.txt'} --out {data}", args.dry_run)

    best = {}
    for name in args.models:
        for lr, l2, batch in itertools.product(LRS, L2S, BATCHES):
            run_dir = out / name / f"lr{lr:g}_l2{l2:g}_b{batch}"
            run(f"mkge train --data {data} --out {run_dir} {MODELS[name]} --lr {lr} --l2 {l2} "
                f"--batch-size {batch} --max-epochs {args.max_epochs}", args.dry_run)
            if args.dry_run:
                continue
            log = (run_dir / "train_log.tsv").read_text().splitlines()[1:]
            mrr = max(float(row.split("\t")[2]) for row in log if row.split("\t")[2])
            if name not in best or mrr > best[name][0]:
                best[name] = (mrr, str(run_dir))
        if not args.dry_run:
            rep = out / name / "test"
            run(f"mkge eval --checkpoint {Path(best[name][1]) / 'best'} --data {data} --out {rep}", False)
            best[name] += (json.loads(rep.with_suffix(".json").read_text())["mrr"],)

    for name, (valid, path, test) in best.items():
        print(f"{name}\tvalid {valid:.3f}\ttest {test:.3f}\t{path}")


if __name__ == "__main__":
    main()
