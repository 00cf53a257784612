"""Filtered link-prediction metrics."""

from __future__ import annotations

import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .kg_store import KgDataset, Triple
from .scoring import Model, query_vectors

HITS_AT = (1, 3, 10)
SIDES = ("head", "tail")


@dataclass(frozen=True)
class RankRecord:
    triple: Triple
    side: str
    rank: float


@dataclass
class EvalReport:
    mrr: float
    hits: dict[int, float]
    records: list[RankRecord] = field(repr=False, default_factory=list)

    @property
    def num_records(self) -> int:
        return len(self.records)

    def summary(self) -> dict[str, float]:
        out = {"mrr": self.mrr}
        out.update({f"hits{k}": self.hits[k] for k in HITS_AT})
        out["num_records"] = self.num_records
        return out

    def write(self, prefix: str | Path) -> tuple[Path, Path]:
        """Write ``<prefix>.tsv`` and ``<prefix>.json``."""
        prefix = Path(prefix)
        prefix.parent.mkdir(parents=True, exist_ok=True)
        summary = self.summary()
        tsv = prefix.with_name(prefix.name + ".tsv")
        with open(tsv, "w", encoding="utf-8") as fh:
            fh.write("\t".join(summary) + "\n")
            fh.write("\t".join(str(v) for v in summary.values()) + "\n")
        js = prefix.with_name(prefix.name + ".json")
        js.write_text(json.dumps(summary, indent=2) + "\n", encoding="utf-8")
        return tsv, js

    def dump_ranks(self, path: str | Path, dataset: KgDataset | None = None) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("head\ttail\trelation\tside\trank\n")
            for rec in self.records:
                h, t, r = rec.triple
                if dataset is not None:
                    h, t = dataset.entities.decode(h), dataset.entities.decode(t)
                    r = dataset.relations.decode(r)
                fh.write(f"{h}\t{t}\t{r}\t{rec.side}\t{rec.rank}\n")


def mid_rank(true_score: float, candidate_scores: np.ndarray) -> float:
    """1 + #higher + #ties / 2 over the (already filtered) candidates."""
    higher = np.count_nonzero(candidate_scores > true_score)
    ties = np.count_nonzero(candidate_scores == true_score)
    return 1.0 + higher + 0.5 * ties


def _filtered_ranks(model: Model, dataset: KgDataset, triples: np.ndarray, side: str) -> np.ndarray:
    q = query_vectors(model.table, model.weights, triples, side)
    flat = model.table.entity.reshape(model.num_entities, -1)
    scores = q @ flat.T  # [B, num_entities]
    fi = dataset.filter_index
    ranks = np.empty(len(triples))
    for b, (h, t, r) in enumerate(triples.tolist()):
        true_ent = h if side == "head" else t
        row = scores[b]
        true_score = row[true_ent]
        known = fi.known_heads(t, r) if side == "head" else fi.known_tails(h, r)
        keep = np.ones(len(row), dtype=bool)
        keep[known] = False
        keep[true_ent] = False
        ranks[b] = mid_rank(true_score, row[keep])
    return ranks


def filtered_rank(model: Model, dataset: KgDataset, t, side: str) -> float:
    if side not in SIDES:
        raise ValueError(f"side must be 'head' or 'tail', got {side!r}")
    return float(_filtered_ranks(model, dataset, np.array([tuple(t)], dtype=np.int64), side)[0])


def _threads(threads: int | None) -> int:
    if threads is not None:
        return max(1, threads)
    env = os.environ.get("MKGE_THREADS")
    if env:
        return max(1, int(env))
    return 1


def metrics_from_ranks(ranks) -> tuple[float, dict[int, float]]:
    ranks = np.asarray(ranks, dtype=np.float64)
    mrr = float(np.mean(1.0 / ranks))
    hits = {k: float(np.mean(ranks <= k)) for k in HITS_AT}
    return mrr, hits


def evaluate(model: Model, dataset: KgDataset, split: str = "test", triples=None,
             batch_size: int = 256, threads: int | None = None) -> EvalReport:
    """Filtered MRR and Hit@k pooled over head- and tail-side corruption.

    ``triples`` overrides the split with an explicit array. Work is chunked
    and may run on several threads; results are assembled in input order.
    """
    triples = dataset.split(split) if triples is None else np.asarray(triples, dtype=np.int64).reshape(-1, 3)
    if len(triples) == 0:
        raise ValueError(f"split {split!r} is empty")
    chunks = [(side, s) for s in range(0, len(triples), batch_size) for side in SIDES]

    def work(job):
        side, s = job
        return _filtered_ranks(model, dataset, triples[s:s + batch_size], side)

    n = _threads(threads)
    if n > 1:
        with ThreadPoolExecutor(n) as pool:
            results = list(pool.map(work, chunks))
    else:
        results = [work(c) for c in chunks]

    by_job = dict(zip(chunks, results))
    records = []
    for s in range(0, len(triples), batch_size):
        block = triples[s:s + batch_size].tolist()
        head_r, tail_r = by_job[("head", s)], by_job[("tail", s)]
        for row, rh, rt in zip(block, head_r, tail_r):
            tr = Triple(*row)
            records.append(RankRecord(tr, "head", float(rh)))
            records.append(RankRecord(tr, "tail", float(rt)))
    mrr, hits = metrics_from_ranks([rec.rank for rec in records])
    return EvalReport(mrr, hits, records)
