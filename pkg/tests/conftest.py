import numpy as np
import pytest

from mkge.scoring import Model, ModelConfig, MultiEmbeddingTable, build_model

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def random_table(rng, num_entities, num_relations, n_e, n_r, dim, scale=1.0):
    return MultiEmbeddingTable(rng.normal(0, scale, (num_entities, n_e, dim)),
                               rng.normal(0, scale, (num_relations, n_r, dim)))


def random_model(rng, preset="complex", num_entities=6, num_relations=3, dim=4, **kw) -> Model:
    cfg = ModelConfig(dim=dim, preset=preset, seed=int(rng.integers(1 << 30)), **kw)
    m = build_model(cfg, num_entities, num_relations)
    m.table = random_table(rng, num_entities, num_relations, cfg.n_e, cfg.n_r, dim)
    return m


def dense_scores(table, omega_flat, triples):
    """Oracle: full dense weighted sum over every (i, j, k) term."""
    triples = np.asarray(triples).reshape(-1, 3)
    w = np.asarray(omega_flat).reshape(table.n_e, table.n_e, table.n_r)
    h = table.entity[triples[:, 0]]
    t = table.entity[triples[:, 1]]
    r = table.relation[triples[:, 2]]
    return np.einsum("ijk,bid,bjd,bkd->b", w, h, t, r)


def naive_filtered_rank(model, dataset, triple, side):
    """Oracle: score every candidate one at a time and count by hand."""
    from mkge.scoring import score_triple

    h, t, r = (int(x) for x in triple)
    true = score_triple(model.table, model.weights, (h, t, r))
    higher = ties = 0
    for e in range(model.num_entities):
        cand = (e, t, r) if side == "head" else (h, e, r)
        if cand == (h, t, r) or cand in dataset.filter_index:
            continue
        s = score_triple(model.table, model.weights, cand)
        if s > true:
            higher += 1
        elif s == true:
            ties += 1
    return 1.0 + higher + 0.5 * ties


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
