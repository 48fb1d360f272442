"""embeval: training-free valuation of external training data on embeddings."""

from .analysis import (
    EvalRecord,
    EvalReport,
    aggregate_report,
    emit,
    parse_records_csv,
    pearson_r,
    scaling_series,
    spearman_r,
)
from .cler import (
    ClassCenters,
    PredictionVector,
    class_centers,
    cler_delta,
    cler_ensemble,
    cler_score,
    predict_centered,
    zero_shot_score,
)
from .cost import CostTable, cost_curve, default_cost_table, load_cost_table, total_cost
from .distmetrics import GaussianStats, clip_score, frechet_distance, gaussian_stats
from .probe import (
    ProbeModel,
    evaluate_metric,
    load_probe_model,
    probe_scores,
    save_probe_model,
    train_linear_probe,
)
from .prompts import (
    PromptKind,
    PromptRecord,
    PromptStrategy,
    load_ce_sentences,
    negative_prompt_for,
    render_prompts,
)
from .retrieval import (
    RetrievalHit,
    RetrievalIndex,
    category_mts,
    dataset_mts,
    filter_by_similarity,
    load_retrieval_index,
    select_retrieval_shots,
    topk,
)
from .store import (
    ConceptGroup,
    DatasetManifest,
    EmbeddingSet,
    MetricKind,
    SourceKind,
    TextEmbeddings,
    ValidationReport,
    builtin_manifest_names,
    l2_normalize,
    load_builtin_manifest,
    load_embedding_set,
    load_manifest,
    save_embedding_set,
    validate_manifest,
)

__version__ = "0.1.0"
