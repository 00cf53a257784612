"""Multi-embedding tables, weight vectors and the weighted trilinear score.

Every entity holds ``n_e`` vectors of size ``D`` and every relation ``n_r``.
A triple is scored as

    S(h, t, r) = sum_{i,j,k} w[i, j, k] * sum_d h[i, d] * t[j, d] * r[k, d]

with ``w`` flattened in lexicographic (i, j, k) order. For n_e = n_r = 2 this
is the row order (111, 112, 121, 122, 211, 212, 221, 222), so a published
8-entry vector such as ``0,0,20,0,0,1,0,0`` can be pasted in directly.
"""

from __future__ import annotations

import copy
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import weights as wl

# name -> (n_e, n_r, flat omega)
TABLE_PRESETS: dict[str, tuple[int, int, tuple[float, ...]]] = {
    "distmult": (2, 2, (1, 0, 0, 0, 0, 0, 0, 0)),
    "complex": (2, 2, (1, 0, 0, 1, 0, -1, 1, 0)),
    "complex_equiv_1": (2, 2, (1, 0, 0, -1, 0, 1, 1, 0)),
    "complex_equiv_2": (2, 2, (0, 1, -1, 0, 1, 0, 0, 1)),
    "complex_equiv_3": (2, 2, (0, 1, 1, 0, -1, 0, 0, 1)),
    "cp": (2, 2, (0, 0, 1, 0, 0, 0, 0, 0)),
    "cph": (2, 2, (0, 0, 1, 0, 0, 1, 0, 0)),
    "cph_equiv": (2, 2, (0, 0, 0, 1, 1, 0, 0, 0)),
}

# Re(h * conj(t) * r) over quaternions; 1-based (i, j, k) -> sign
QUATERNION_TERMS: dict[tuple[int, int, int], int] = {
    (1, 1, 1): 1, (2, 2, 1): 1, (3, 3, 1): 1, (4, 4, 1): 1,
    (1, 2, 2): 1, (2, 1, 2): -1, (3, 4, 2): 1, (4, 3, 2): -1,
    (1, 3, 3): 1, (2, 4, 3): -1, (3, 1, 3): -1, (4, 2, 3): 1,
    (1, 4, 4): 1, (2, 3, 4): 1, (3, 2, 4): -1, (4, 1, 4): -1,
}

FIXED_PRESETS = tuple(TABLE_PRESETS) + ("quaternion", "uniform")
PRESET_NAMES = FIXED_PRESETS + ("custom", "learnable")


def _quaternion_omega() -> np.ndarray:
    w = np.zeros((4, 4, 4))
    for (i, j, k), sign in QUATERNION_TERMS.items():
        w[i - 1, j - 1, k - 1] = sign
    return w.ravel()


@dataclass
class WeightVector:
    """Weights over the n_e * n_e * n_r interaction terms.

    In ``learnable`` mode ``values`` holds the raw parameters and ``omega`` is
    always recomputed through the restriction, so the two never drift apart.
    """

    n_e: int
    n_r: int
    values: np.ndarray
    mode: str = "fixed"
    restriction: str = "none"
    name: str = "custom"

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64).ravel().copy()
        if self.values.size != self.n_e * self.n_e * self.n_r:
            raise ValueError(
                f"weight vector needs n_e*n_e*n_r = {self.n_e * self.n_e * self.n_r} entries, "
                f"got {self.values.size}")
        if self.mode not in ("fixed", "learnable"):
            raise ValueError(f"mode must be 'fixed' or 'learnable', got {self.mode!r}")
        if self.mode == "fixed" and self.restriction != "none":
            raise ValueError("restrictions apply to learnable weight vectors only")
        if self.restriction not in wl.RESTRICTIONS:
            raise ValueError(f"unknown restriction {self.restriction!r}")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("weight vector has non-finite entries")

    @property
    def learnable(self) -> bool:
        return self.mode == "learnable"

    @property
    def raw(self) -> np.ndarray:
        return self.values

    @property
    def omega(self) -> np.ndarray:
        if self.learnable:
            return wl.restrict(self.values, self.restriction)
        return self.values

    def tensor(self) -> np.ndarray:
        return self.omega.reshape(self.n_e, self.n_e, self.n_r)

    def terms(self) -> list[tuple[int, int, int, float]]:
        """Nonzero (i, j, k, weight) terms, 0-based."""
        w = self.tensor()
        return [(int(i), int(j), int(k), float(w[i, j, k])) for i, j, k in zip(*np.nonzero(w))]


def preset_weight_vector(name: str, n_e: int | None = None, n_r: int | None = None) -> WeightVector:
    """Fixed weight vector for a named model.

    ``distmult`` and ``uniform`` accept any n (distmult keeps only the
    (1, 1, 1) term); every other preset has a fixed size.
    """
    if name in TABLE_PRESETS:
        pe, pr, values = TABLE_PRESETS[name]
        if name == "distmult" and (n_e is not None or n_r is not None):
            n_e = n_e if n_e is not None else (n_r if n_r is not None else pe)
            n_r = n_r if n_r is not None else n_e
            values = np.zeros(n_e * n_e * n_r)
            values[0] = 1.0
            pe, pr = n_e, n_r
    elif name == "quaternion":
        pe, pr, values = 4, 4, _quaternion_omega()
    elif name == "uniform":
        pe = n_e if n_e is not None else 2
        pr = n_r if n_r is not None else pe
        values = np.ones(pe * pe * pr)
    else:
        raise ValueError(f"unknown preset {name!r}; valid presets: {', '.join(FIXED_PRESETS)}")
    if (n_e is not None and n_e != pe) or (n_r is not None and n_r != pr):
        raise ValueError(f"preset {name!r} requires n_e={pe}, n_r={pr}; got n_e={n_e}, n_r={n_r}")
    return WeightVector(pe, pr, values, name=name)


@dataclass
class ModelConfig:
    dim: int = 200
    preset: str = "complex"
    n_e: int | None = None
    n_r: int | None = None
    omega: tuple[float, ...] | None = None  # preset == "custom"
    restriction: str = "none"  # preset == "learnable"
    sparse: bool = False  # Dirichlet penalty on learnable omega
    seed: int = 0

    def __post_init__(self):
        if self.preset not in PRESET_NAMES:
            raise ValueError(f"unknown preset {self.preset!r}; valid: {', '.join(PRESET_NAMES)}")
        if self.dim <= 0:
            raise ValueError(f"dim must be positive, got {self.dim}")
        if self.omega is not None:
            self.omega = tuple(float(x) for x in self.omega)
        if self.preset == "custom" and not self.omega:
            raise ValueError("preset 'custom' needs omega values")
        if self.preset != "custom" and self.omega is not None:
            raise ValueError(f"omega values given but preset is {self.preset!r}")
        if self.preset != "learnable" and self.restriction != "none":
            raise ValueError("restriction is only meaningful for learnable weights")
        if self.preset != "learnable" and self.sparse:
            raise ValueError("sparse is only meaningful for learnable weights")
        self.n_e, self.n_r = self._resolve_sizes()

    def _resolve_sizes(self) -> tuple[int, int]:
        n_e, n_r = self.n_e, self.n_r
        if self.preset == "custom":
            size = len(self.omega)
            if n_e is None and n_r is None:
                n = round(size ** (1 / 3))
                if n ** 3 != size:
                    raise ValueError(f"cannot infer n from {size} omega values; set n_e and n_r")
                n_e = n_r = n
            elif n_e is None:
                n_e = round((size / n_r) ** 0.5)
            elif n_r is None:
                n_r = size // (n_e * n_e)
            if n_e * n_e * n_r != size:
                raise ValueError(f"{size} omega values do not match n_e={n_e}, n_r={n_r}")
            return n_e, n_r
        if self.preset == "distmult":
            # one-embedding model unless asked otherwise
            n_e = n_e if n_e is not None else (n_r if n_r is not None else 1)
            return n_e, n_r if n_r is not None else n_e
        if self.preset in ("uniform", "learnable"):
            n_e = n_e if n_e is not None else (n_r if n_r is not None else 2)
            return n_e, n_r if n_r is not None else n_e
        w = preset_weight_vector(self.preset, n_e, n_r)
        return w.n_e, w.n_r

    def weight_vector(self, rng: np.random.Generator | None = None) -> WeightVector:
        if self.preset == "custom":
            return WeightVector(self.n_e, self.n_r, self.omega, name="custom")
        if self.preset == "learnable":
            rng = rng if rng is not None else np.random.default_rng(self.seed)
            raw = rng.normal(0.0, 0.1, self.n_e * self.n_e * self.n_r)
            return WeightVector(self.n_e, self.n_r, raw, mode="learnable",
                                restriction=self.restriction, name="learnable")
        return preset_weight_vector(self.preset, self.n_e, self.n_r)


@dataclass
class MultiEmbeddingTable:
    entity: np.ndarray  # [num_entities, n_e, D]
    relation: np.ndarray  # [num_relations, n_r, D]

    def __post_init__(self):
        self.entity = np.asarray(self.entity, dtype=np.float64)
        self.relation = np.asarray(self.relation, dtype=np.float64)
        if self.entity.ndim != 3 or self.relation.ndim != 3:
            raise ValueError("embedding arrays must be 3-d [item, embedding, dim]")
        if self.entity.shape[2] != self.relation.shape[2]:
            raise ValueError(f"dimension mismatch: entities D={self.entity.shape[2]}, "
                             f"relations D={self.relation.shape[2]}")

    @property
    def num_entities(self) -> int:
        return self.entity.shape[0]

    @property
    def num_relations(self) -> int:
        return self.relation.shape[0]

    @property
    def n_e(self) -> int:
        return self.entity.shape[1]

    @property
    def n_r(self) -> int:
        return self.relation.shape[1]

    @property
    def dim(self) -> int:
        return self.entity.shape[2]

    def copy(self) -> "MultiEmbeddingTable":
        return MultiEmbeddingTable(self.entity.copy(), self.relation.copy())


def normalize_rows(x: np.ndarray) -> np.ndarray:
    """Rescale every last-axis vector to unit L2 norm, in place.

    Zero vectors become the first basis vector.
    """
    norms = np.linalg.norm(x, axis=-1, keepdims=True)
    zero = norms[..., 0] == 0
    np.divide(x, norms, out=x, where=norms > 0)
    if np.any(zero):
        x[zero] = 0.0
        x[zero, 0] = 1.0
    return x


def init_embeddings(config: ModelConfig, num_entities: int, num_relations: int,
                    seed: int | None = None) -> MultiEmbeddingTable:
    if num_entities <= 0 or num_relations <= 0:
        raise ValueError("need at least one entity and one relation")
    rng = np.random.default_rng(config.seed if seed is None else seed)
    scale = 1.0 / np.sqrt(config.dim)
    entity = rng.normal(0.0, scale, (num_entities, config.n_e, config.dim))
    relation = rng.normal(0.0, scale, (num_relations, config.n_r, config.dim))
    normalize_rows(entity)
    return MultiEmbeddingTable(entity, relation)


def _check_compatible(table: MultiEmbeddingTable, w: WeightVector) -> None:
    if table.n_e != w.n_e or table.n_r != w.n_r:
        raise ValueError(f"table has n_e={table.n_e}, n_r={table.n_r} but weight vector "
                         f"has n_e={w.n_e}, n_r={w.n_r}")


def _check_indices(table: MultiEmbeddingTable, triples: np.ndarray) -> None:
    if triples.size == 0:
        return
    if (triples.min() < 0 or triples[:, :2].max() >= table.num_entities
            or triples[:, 2].max() >= table.num_relations):
        raise IndexError(f"triple index out of range for {table.num_entities} entities, "
                         f"{table.num_relations} relations")


def _as_triples(triples) -> np.ndarray:
    return np.asarray(triples, dtype=np.int64).reshape(-1, 3)


def score_batch(table: MultiEmbeddingTable, w: WeightVector, triples) -> np.ndarray:
    triples = _as_triples(triples)
    _check_compatible(table, w)
    _check_indices(table, triples)
    h = table.entity[triples[:, 0]]
    t = table.entity[triples[:, 1]]
    r = table.relation[triples[:, 2]]
    out = np.zeros(len(triples))
    for i, j, k, wt in w.terms():
        out += wt * np.einsum("bd,bd,bd->b", h[:, i], t[:, j], r[:, k])
    return out


def score_triple(table: MultiEmbeddingTable, w: WeightVector, t) -> float:
    return float(score_batch(table, w, [tuple(t)])[0])


def query_vectors(table: MultiEmbeddingTable, w: WeightVector, triples, side: str) -> np.ndarray:
    """Per-triple vectors q with ``score(corrupted by e) == q . entity[e].ravel()``.

    Returns [B, n_e * D]. For ``side='tail'`` the head and relation are held
    fixed; for ``side='head'`` the tail and relation.
    """
    triples = _as_triples(triples)
    _check_compatible(table, w)
    _check_indices(table, triples)
    r = table.relation[triples[:, 2]]
    q = np.zeros((len(triples), table.n_e, table.dim))
    if side == "tail":
        h = table.entity[triples[:, 0]]
        for i, j, k, wt in w.terms():
            q[:, j] += wt * h[:, i] * r[:, k]
    elif side == "head":
        t = table.entity[triples[:, 1]]
        for i, j, k, wt in w.terms():
            q[:, i] += wt * t[:, j] * r[:, k]
    else:
        raise ValueError(f"side must be 'head' or 'tail', got {side!r}")
    return q.reshape(len(triples), -1)


def score_against_all(table: MultiEmbeddingTable, w: WeightVector, fixed, corrupt_side: str) -> np.ndarray:
    q = query_vectors(table, w, [tuple(fixed)], corrupt_side)
    return table.entity.reshape(table.num_entities, -1) @ q[0]


def export_concatenated(table: MultiEmbeddingTable) -> tuple[np.ndarray, np.ndarray]:
    """Entity and relation vectors as e(1) || e(2) || ... || e(n)."""
    return (table.entity.reshape(table.num_entities, -1).copy(),
            table.relation.reshape(table.num_relations, -1).copy())


@dataclass
class Model:
    config: ModelConfig
    table: MultiEmbeddingTable
    weights: WeightVector
    epoch: int = 0
    extra: dict = field(default_factory=dict)

    @property
    def num_entities(self) -> int:
        return self.table.num_entities

    @property
    def num_relations(self) -> int:
        return self.table.num_relations

    def score(self, triples) -> np.ndarray:
        return score_batch(self.table, self.weights, triples)

    def copy(self) -> "Model":
        return copy.deepcopy(self)


def build_model(config: ModelConfig, num_entities: int, num_relations: int) -> Model:
    seeds = np.random.SeedSequence(config.seed).spawn(2)
    table = init_embeddings(config, num_entities, num_relations,
                            seed=int(seeds[0].generate_state(1)[0]))
    weights = config.weight_vector(np.random.default_rng(seeds[1]))
    return Model(config, table, weights)


# -- checkpoints -------------------------------------------------------------

META_FILE = "meta.json"
PARAMS_FILE = "params.bin"


def save_checkpoint(model: Model, directory: str | Path) -> Path:
    """Write ``meta.json`` plus ``params.bin`` (float32 little-endian).

    The binary holds the entity block then the relation block, each row-major
    [item][embedding][dim].
    """
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    table, w = model.table, model.weights
    meta = {
        "format": "mkge-checkpoint-1",
        "num_entities": table.num_entities,
        "num_relations": table.num_relations,
        "n_e": table.n_e,
        "n_r": table.n_r,
        "dim": table.dim,
        "dtype": "<f4",
        "config": asdict(model.config),
        "weights": {
            "name": w.name,
            "mode": w.mode,
            "restriction": w.restriction,
            "omega": w.omega.tolist(),
            "raw": w.raw.tolist() if w.learnable else None,
        },
        "epoch": model.epoch,
        "extra": model.extra,
    }
    (directory / META_FILE).write_text(json.dumps(meta, indent=2) + "\n", encoding="utf-8")
    blob = np.concatenate([table.entity.ravel(), table.relation.ravel()]).astype("<f4")
    blob.tofile(directory / PARAMS_FILE)
    return directory


def load_checkpoint(directory: str | Path) -> Model:
    directory = Path(directory)
    meta = json.loads((directory / META_FILE).read_text(encoding="utf-8"))
    ne, nr = meta["num_entities"], meta["num_relations"]
    n_e, n_r, dim = meta["n_e"], meta["n_r"], meta["dim"]
    blob = np.fromfile(directory / PARAMS_FILE, dtype=meta.get("dtype", "<f4")).astype(np.float64)
    n_ent = ne * n_e * dim
    expected = n_ent + nr * n_r * dim
    if blob.size != expected:
        raise ValueError(f"{directory / PARAMS_FILE}: expected {expected} values, found {blob.size}")
    table = MultiEmbeddingTable(blob[:n_ent].reshape(ne, n_e, dim),
                                blob[n_ent:].reshape(nr, n_r, dim))
    cfg = dict(meta["config"])
    if cfg.get("omega") is not None:
        cfg["omega"] = tuple(cfg["omega"])
    config = ModelConfig(**cfg)
    wm = meta["weights"]
    values = wm["raw"] if wm["mode"] == "learnable" else wm["omega"]
    weights = WeightVector(n_e, n_r, values, mode=wm["mode"], restriction=wm["restriction"],
                           name=wm["name"])
    return Model(config, table, weights, epoch=meta.get("epoch", 0), extra=meta.get("extra", {}))


def write_export(path: str | Path, names, vectors: np.ndarray) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for name, vec in zip(names, vectors):
            fh.write(name + "\t" + "\t".join(repr(float(x)) for x in vec) + "\n")


def read_export(path: str | Path) -> tuple[list[str], np.ndarray]:
    names, rows = [], []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            fields = line.rstrip("\n").split("\t")
            names.append(fields[0])
            rows.append([float(x) for x in fields[1:]])
    return names, np.array(rows, dtype=np.float64)
