"""Topic-aware document expansion with sparse and dual-index dense retrieval."""

from .corpus import Document, ExpandedDocument, load_corpus, load_qrels, load_queries
from .dense import DualIndex, FusionParams, VectorIndex, search_fused
from .evaluation import evaluate_run, read_run, write_run
from .gateway import BackendConfig, make_chat, make_embedder
from .qgen import GenerationConfig, generate_queries
from .sparse import Bm25Params, InvertedIndex, build_index
from .topics import OUTLIER, TopicConfig, TopicModel, assign_topic, fit_topics

__version__ = "0.1.0"

__all__ = [
    "BackendConfig", "Bm25Params", "Document", "DualIndex", "ExpandedDocument", "FusionParams",
    "GenerationConfig", "InvertedIndex", "OUTLIER", "TopicConfig", "TopicModel", "VectorIndex",
    "assign_topic", "build_index", "evaluate_run", "fit_topics", "generate_queries", "load_corpus",
    "load_qrels", "load_queries", "make_chat", "make_embedder", "read_run", "search_fused", "write_run",
]
