"""Smoking-content detection for video frame sequences and raw text."""

from .classify import (
    DetectionMetrics,
    DetectionSegment,
    MockClassifierBackend,
    RemoteClassifierBackend,
    classify_all,
    classify_frames,
    evaluate_detection,
    fuse,
    segments_from_selection,
)
from .corpus import (
    BlockPlan,
    CorpusStats,
    PromptRecord,
    build_blocks,
    corpus_stats,
    project_labels,
    render_prompt,
)
from .embedding import (
    EmbeddingCache,
    EmbeddingVector,
    MockEmbeddingBackend,
    RemoteEmbeddingBackend,
    cosine,
    embed_image,
    embed_text,
)
from .filtering import (
    CutLineConfig,
    FrameSelection,
    SimilarityTrace,
    build_trace,
    cutting_line,
    filter_frames,
    sorted_trace,
)
from .ingest import (
    Frame,
    FrameSequence,
    MediaKind,
    SyntheticDecoder,
    detect_format,
    load_text,
    sample_frames,
)
from .ner import (
    AnnotatedSpan,
    Gazetteer,
    NerReport,
    evaluate_ner,
    gazetteer_match,
    ner_tag,
)
from .store import FeedbackExport, RunRecord, Store, Verdict

__version__ = "0.1.0"
