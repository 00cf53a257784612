"""Small synthetic knowledge graphs for sanity experiments."""

from __future__ import annotations

import numpy as np

from .kg_store import KgDataset, Vocabulary, from_encoded
from .scoring import Model


def _vocab(prefix: str, n: int) -> Vocabulary:
    return Vocabulary(f"{prefix}{i}" for i in range(n))


def antisymmetric_kg(num_pairs: int = 200, num_entities: int = 100, num_relations: int = 2,
                     seed: int = 0) -> KgDataset:
    """Directed facts (a, b, r) whose reversals (b, a, r) never hold.

    Entities carry a hidden random order and every fact points from a lower to
    a higher position, so no reversed pair is ever a fact. The forward pairs
    form the train split; the reversed pairs are stored as the test split and
    are meant to be scored as negatives, not ranked.
    """
    rng = np.random.default_rng(seed)
    order = rng.permutation(num_entities)  # order[e] = hidden position
    seen: set[tuple[int, int, int]] = set()
    pairs = []
    while len(pairs) < num_pairs:
        a, b = rng.choice(num_entities, 2, replace=False)
        if order[a] > order[b]:
            a, b = b, a
        r = int(rng.integers(num_relations))
        key = (int(a), int(b), r)
        if key in seen:
            continue
        seen.add(key)
        pairs.append(key)
    train = np.array(pairs, dtype=np.int64)
    reversed_ = train[:, [1, 0, 2]]
    # reversed pairs must stay out of the filter index: only train is registered
    ds = from_encoded(_vocab("e", num_entities), _vocab("r", num_relations), train)
    ds.test = reversed_
    return ds


def direction_accuracy(model: Model, forward) -> float:
    """Fraction of pairs scored higher forward than reversed; ties count 1/2."""
    forward = np.asarray(forward, dtype=np.int64).reshape(-1, 3)
    s_fwd = model.score(forward)
    s_rev = model.score(forward[:, [1, 0, 2]])
    return float(np.mean((s_fwd > s_rev) + 0.5 * (s_fwd == s_rev)))


def block_model_kg(num_entities: int = 50, num_relations: int = 4, num_train: int = 500,
                   num_test: int = 100, num_blocks: int = 5, density: float = 0.3,
                   inverse_pairs: bool = False, seed: int = 0) -> KgDataset:
    """Triples sampled from a random stochastic block model.

    Each entity belongs to one block and each relation links a random subset
    of ordered block pairs. Distinct triples are drawn uniformly from the
    allowed set and split into train and test (validation mirrors test).

    With ``inverse_pairs`` the second half of the relations are inverses of
    the first half: base facts are sampled from the block model and every
    fact (h, t, r) is stored together with (t, h, inverse(r)) before the
    split, as with hypernym/hyponym style relations.
    """
    rng = np.random.default_rng(seed)
    if inverse_pairs and num_relations % 2:
        raise ValueError("inverse_pairs needs an even number of relations")
    num_base = num_relations // 2 if inverse_pairs else num_relations
    block = rng.integers(num_blocks, size=num_entities)
    allowed = rng.random((num_base, num_blocks, num_blocks)) < density
    h, t, r = np.meshgrid(np.arange(num_entities), np.arange(num_entities),
                          np.arange(num_base), indexing="ij")
    ok = allowed[r, block[h], block[t]] & (h != t)
    candidates = np.stack([h[ok], t[ok], r[ok]], axis=1)
    need = num_train + num_test
    n_draw = (need + 1) // 2 if inverse_pairs else need
    if len(candidates) < n_draw:
        raise ValueError(f"block model admits only {len(candidates)} triples, need {n_draw}")
    pick = candidates[rng.choice(len(candidates), n_draw, replace=False)]
    if inverse_pairs:
        inv = np.stack([pick[:, 1], pick[:, 0], pick[:, 2] + num_base], axis=1)
        pick = np.concatenate([pick, inv])
        pick = pick[rng.permutation(len(pick))][:need]
    train, test = pick[:num_train], pick[num_train:]
    return from_encoded(_vocab("e", num_entities), _vocab("r", num_relations), train, test, test)
