"""Privacy-policy case matching, grading and label serving."""

from .corpus import (
    Annotation,
    AnnotationSet,
    Case,
    CaseCatalog,
    Cluster,
    ClusterSet,
    Corpus,
    CorpusError,
    CorpusStats,
    DataSplit,
    Excerpt,
    Rating,
    catalog_stats,
    ingest_annotations,
    ingest_cases,
    load_clusters,
    split_dataset,
)
from .evaluation import (
    ClassReport,
    MeanReport,
    aggregate_runs,
    classification_report,
    evaluate,
    evaluate_partitioned,
    sweep_ratios,
)
from .labeling import (
    Grade,
    MatchResult,
    PrivacyLabel,
    Segment,
    SegmentKind,
    assign_grade,
    build_label,
    evaluate_scan,
    scan_policy,
    segment_policy,
)
from .matchers import (
    CrossEncoderMatcher,
    EmbeddingCosineMatcher,
    HashingEmbedder,
    PairMatcher,
    PromptMatcher,
    TrainConfig,
    bce_loss,
    calibrate_threshold,
    cosine_matcher,
    prompt_matcher,
    train_cross_encoder,
)
from .perplexity import (
    PerplexityRecord,
    UniformVocabModel,
    pseudo_perplexity,
    rating_perplexity_report,
)
from .sampling import (
    LabeledPair,
    PairOrigin,
    SamplingConfig,
    SamplingExhaustionWarning,
    TrainingSet,
    build_training_set,
    sample_cluster_negatives,
    sample_random_negatives,
    sample_training_set,
)

__version__ = "0.1.0"
