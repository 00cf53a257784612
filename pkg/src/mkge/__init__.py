"""Multi-embedding interaction models for knowledge graph link prediction."""

from .kg_store import KgDataset, Triple, Vocabulary, build_dataset, parse_triples
from .scoring import (
    Model,
    ModelConfig,
    MultiEmbeddingTable,
    WeightVector,
    build_model,
    load_checkpoint,
    preset_weight_vector,
    save_checkpoint,
    score_against_all,
    score_triple,
)
from .trainer import TrainConfig, train
from .evaluator import EvalReport, evaluate, filtered_rank

__version__ = "0.1.0"
