"""Toolkit for delegitimization-discourse corpora: corpus management and
segmentation, an annotation workflow with agreement statistics, a two-stage
detection pipeline with span extraction, a hashed-feature linear baseline,
metric computation, and speaker-level statistical analysis.
"""

from .version import __version__

from .errors import (
    DataError,
    DegenerateBandwidthError,
    DegenerateDataError,
    DegenerateVarianceError,
    DuplicateIdError,
    ModelFormatError,
    PddError,
    SchemaError,
    SpanMarkupError,
    UndefinedCorrelationError,
    UnknownAnnotatorError,
    WireProtocolError,
)
from .records import (
    CHARACTERISTIC_FIELDS,
    FLAG_FIELDS,
    INTENSITY_VALUES,
    Bloc,
    Characteristics,
    Gender,
    PddAnnotation,
    PredictionRecord,
    SentenceRecord,
    Source,
    SpeakerMeta,
    Span,
    validate_spans,
)
from .spans import extract_phrases, parse_span_markup, render_span_markup
from .segmentation import segment_document, segment_text
from .corpus import (
    Corpus,
    CorpusSplit,
    CorpusStats,
    corpus_stats,
    ingest,
    largest_remainder_sizes,
    render_stats,
    split_corpus,
)
from .labelmap import DEFAULT_LABEL_MAP, LabelMap, label_map_from_dict, load_label_map
from .codecs import (
    ANSWER_SEPARATOR,
    decode_span_output,
    decode_stage1_output,
    decode_stage2_output,
    encode_span_target,
    encode_stage1_target,
    encode_stage2_target,
)
from .agreement import AgreementReport, agreement_report, cohen_kappa, pairwise_correlation
from .workflow import AnnotationWorkflow, GoldProvenance, TaskStatus
from .pipeline import export_training_file, parse_training_file, run_pipeline
from .evaluation import (
    BinaryMetrics,
    CharacteristicMetrics,
    MetricsReport,
    SpanMetrics,
    binary_metrics,
    characteristic_metrics,
    evaluate,
    f1_from_pr,
    macro_f1,
    span_metrics,
)
from .analysis import (
    AggregateResult,
    BeforeAfterTable,
    CharacteristicsProfile,
    DensityCurve,
    GroupComparison,
    LogOddsEntry,
    SpeakerShare,
    TimePoint,
    WelchResult,
    before_after,
    characteristics_profile,
    compare_groups,
    density_estimate,
    speaker_aggregate,
    temporal_series,
    weighted_log_odds,
    welch_t_test,
)
from .wire import (
    PROTOCOL,
    TASK_KINDS,
    WireClient,
    build_error,
    build_infer_request,
    build_infer_response,
    canonical_json,
    parse_infer_response,
    run_contract_checks,
    validate_infer_request,
)
from .backends import BackendKind, create_wire_app, make_backend, mock_backend

__all__ = [name for name in dir() if not name.startswith("_")]
