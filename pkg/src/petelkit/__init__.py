"""petelkit: turn forecast requests in plain language into bound PeTEL
task expressions through embedding-ranked slot filling and an interactive
accept/reject confirmation loop."""

from .config import EngineConfig
from .datagen import (
    AnnotatedUtterance,
    Template,
    emit_conll,
    emit_squad,
    fill_templates,
    load_templates,
    parse_conll,
    train_test_split,
)
from .embeddings import (
    VectorStore,
    cosine,
    euclidean_similarity,
    load_vectors,
    phrase_similarity,
    phrase_vector,
    sem_sim,
)
from .evaluation import (
    EvalReport,
    ValidationInstance,
    evaluate,
    load_validation,
    mrr,
    slot_f1,
    wilcoxon_signed_rank,
)
from .extraction import (
    ExtractionResult,
    LexicalExtractor,
    RemoteExtractor,
    SalientPhrase,
    candidate_phrases,
    lexical_extract,
    normalize_confidences,
    remote_extract,
)
from .petel import (
    Candidate,
    Petel,
    SLOT_ORDER,
    SlotDistribution,
    SlotKind,
    allowed_operators,
    init_petel,
    parse_petel,
    render_petel,
    serialize_petel,
)
from .ranker import (
    Posterior,
    Session,
    feedback,
    propose_top,
    session_from_document,
    session_to_document,
    slot_posterior,
    start_session,
)
from .schema import Attribute, AttributeType, Schema, load_schema, tokenize_attribute

__version__ = "0.1.0"

__all__ = [
    "AnnotatedUtterance",
    "Attribute",
    "AttributeType",
    "Candidate",
    "EngineConfig",
    "EvalReport",
    "ExtractionResult",
    "LexicalExtractor",
    "Petel",
    "Posterior",
    "RemoteExtractor",
    "SLOT_ORDER",
    "SalientPhrase",
    "Schema",
    "Session",
    "SlotDistribution",
    "SlotKind",
    "Template",
    "ValidationInstance",
    "VectorStore",
    "allowed_operators",
    "candidate_phrases",
    "cosine",
    "emit_conll",
    "emit_squad",
    "euclidean_similarity",
    "evaluate",
    "feedback",
    "fill_templates",
    "init_petel",
    "lexical_extract",
    "load_schema",
    "load_templates",
    "load_validation",
    "load_vectors",
    "mrr",
    "normalize_confidences",
    "parse_conll",
    "parse_petel",
    "phrase_similarity",
    "phrase_vector",
    "propose_top",
    "remote_extract",
    "render_petel",
    "sem_sim",
    "serialize_petel",
    "session_from_document",
    "session_to_document",
    "slot_f1",
    "slot_posterior",
    "start_session",
    "tokenize_attribute",
    "train_test_split",
    "wilcoxon_signed_rank",
]
