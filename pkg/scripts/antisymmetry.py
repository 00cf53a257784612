#!/usr/bin/env python3
"""Direction discrimination on a synthetic antisymmetric graph.

DistMult scores (a, b, r) and (b, a, r) identically, so it cannot tell a fact
from its reversal; models with asymmetric interaction terms can.
"""

import argparse

from mkge.scoring import ModelConfig, build_model
from mkge.synthetic import antisymmetric_kg, direction_accuracy
from mkge.trainer import TrainConfig, train

MODELS = {"distmult": 20, "complex": 10, "cph": 10, "quaternion": 5}


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--pairs", type=int, default=200)
    p.add_argument("--epochs", type=int, default=500)
    p.add_argument("--lr", type=float, default=1e-2)
    p.add_argument("--seeds", type=int, nargs="+", default=[0])
    args = p.parse_args()

    cfg = TrainConfig(learning_rate=args.lr, l2_lambda=0.0, max_epochs=args.epochs, valid_split=None)
    print("seed\tmodel\tdim\taccuracy")
    for seed in args.seeds:
        ds = antisymmetric_kg(num_pairs=args.pairs, seed=seed)
        for preset, dim in MODELS.items():
            model = build_model(ModelConfig(dim=dim, preset=preset, seed=seed + 1),
                                ds.num_entities, ds.num_relations)
            acc = direction_accuracy(train(ds, model, cfg).model, ds.train)
            print(f"{seed}\t{preset}\t{dim}\t{acc:.3f}")


if __name__ == "__main__":
    main()
