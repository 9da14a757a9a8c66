"""
Pipeline configuration: one YAML file validated into ``PipelineConfig``.
"""
import difflib
import logging
import typing
from pathlib import Path
from typing import Annotated, Any, Dict, List, Literal, Optional, Tuple, Type, Union

import yaml
from pydantic import AfterValidator, BaseModel, ConfigDict, Field, ValidationError, ValidationInfo, model_validator

from casecontext.corpus.segment import (
    DEFAULT_ABBREVIATIONS,
    DEFAULT_ANALYSIS_PATTERNS,
    DEFAULT_BACKGROUND_PATTERNS,
    DEFAULT_CONCLUSION_PATTERNS,
)
from casecontext.encoding.context import DEFAULT_BUDGET
from casecontext.errors import ConfigError
from casecontext.extraction.models import (
    DEFAULT_ATTRIBUTION_PATTERNS,
    DEFAULT_JUDGEMENT_HEADINGS,
    DEFAULT_PLACEHOLDER_TOKENS,
)
from casecontext.utils.helpers import content_hash

logger = logging.getLogger(__name__)


def _resolve(value: Path, info: ValidationInfo) -> Path:
    base = (info.context or {}).get("base_dir")
    if base is not None and not value.is_absolute():
        value = Path(base) / value
    return value


def _must_exist(value: Path, info: ValidationInfo) -> Path:
    value = _resolve(value, info)
    if (info.context or {}).get("check_paths", True) and not value.exists():
        raise ValueError(f"path does not exist: {value}")
    return value


ConfigPath = Annotated[Path, AfterValidator(_resolve)]
ExistingPath = Annotated[Path, AfterValidator(_must_exist)]


class Section(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class SyntheticSettings(Section):
    n_topics: int = Field(6, ge=1)
    per_topic: int = Field(10, ge=2)
    queries_per_topic: int = Field(2, ge=1)
    seed: int = 13


class SegmentationSettings(Section):
    background_patterns: List[str] = list(DEFAULT_BACKGROUND_PATTERNS)
    analysis_patterns: List[str] = list(DEFAULT_ANALYSIS_PATTERNS)
    conclusion_patterns: List[str] = list(DEFAULT_CONCLUSION_PATTERNS)
    abbreviations: List[str] = list(DEFAULT_ABBREVIATIONS)


class CorpusSettings(Section):
    """
    Either ``path`` to a directory of case files or ``synthetic`` settings
    for the bundled clustered corpus.
    """
    path: Optional[ExistingPath] = None
    synthetic: Optional[SyntheticSettings] = None
    case_glob: str = "*.txt"
    qrels: Optional[ExistingPath] = None
    qrels_format: Literal["tsv", "json"] = "tsv"
    corpus_id: Optional[str] = None
    french_threshold: float = Field(0.5, ge=0.0, le=1.0)
    segmentation: SegmentationSettings = SegmentationSettings()

    @model_validator(mode="after")
    def _one_source(self) -> "CorpusSettings":
        if (self.path is None) == (self.synthetic is None):
            raise ValueError("corpus needs exactly one of 'path' and 'synthetic'")
        return self


class ExtractionSettings(Section):
    placeholder_tokens: List[str] = Field(default_factory=lambda: list(DEFAULT_PLACEHOLDER_TOKENS), min_length=1)
    judgement_headings: List[str] = list(DEFAULT_JUDGEMENT_HEADINGS)
    attribution_patterns: List[str] = list(DEFAULT_ATTRIBUTION_PATTERNS)


class TripletSettings(Section):
    import_dir: Optional[ExistingPath] = None


class GatewaySettings(Section):
    backend: Literal["mock", "openai"] = "mock"
    mode: Literal["live", "record", "replay"] = "live"
    base_url: Optional[str] = None
    chat_model: str = "gpt-5"
    embedding_model: str = "Qwen3-Embedding-8B"
    transcript: Optional[ConfigPath] = None
    max_in_flight: int = Field(4, ge=1)
    timeout: float = Field(60.0, gt=0)
    max_retries: int = Field(3, ge=0)
    backoff_seconds: float = Field(1.0, ge=0)
    temperature: float = Field(0.0, ge=0)
    max_output_tokens: int = Field(256, ge=1)
    mock_seed: int = 0
    mock_dim: int = Field(4096, ge=8)
    mock_summary_words: int = Field(40, ge=1)


class EncodingSettings(Section):
    template_id: Literal["default", "prompt1", "prompt2"] = "default"
    budget: int = Field(DEFAULT_BUDGET, ge=1)
    include_triplets: bool = True
    include_reasoning: bool = True
    embedder: Literal["local", "gateway"] = "local"
    local_dim: int = Field(4096, ge=8)
    local_seed: int = 0
    batch_size: int = Field(16, ge=1)


class Bm25Settings(Section):
    k1: float = Field(1.2, ge=0)
    b: float = Field(0.75, ge=0, le=1)
    stopwords: Optional[ExistingPath] = None


class MiningSettings(Section):
    count: int = Field(1, ge=1)
    pool_depth: int = Field(10, ge=1)

    @model_validator(mode="after")
    def _pool_covers_count(self) -> "MiningSettings":
        if self.pool_depth < self.count:
            raise ValueError("pool_depth must be at least count")
        return self


class TrainingSettings(Section):
    steps: int = Field(200, ge=0)
    batch_size: int = Field(2, ge=1)
    lr: float = Field(1e-3, gt=0)
    weight_decay: float = Field(0.0, ge=0)
    beta1: float = Field(0.9, ge=0, lt=1)
    beta2: float = Field(0.999, ge=0, lt=1)
    eps: float = Field(1e-8, gt=0)
    temperature: float = Field(0.05, gt=0)
    d_out: int = Field(256, ge=1)
    init_noise: float = Field(1e-3, ge=0)
    easy_negatives: int = Field(1, ge=0)
    checkpoint_every: int = Field(0, ge=0)
    log_every: int = Field(50, ge=0)
    train_qrels: Optional[ExistingPath] = None
    train_qrels_format: Literal["tsv", "json"] = "tsv"


class EvaluationSettings(Section):
    ap_normalizer: Literal["min_rel_k", "rel"] = "min_rel_k"
    resamples: int = Field(100_000, ge=1)
    test_seed: int = 13


class PipelineConfig(Section):
    """
    Every setting of a pipeline run. Relative paths are resolved against
    the directory of the config file.

    ``extraction.judgement_headings`` defaults to the corpus conclusion
    patterns and must contain every one of them.
    """
    corpus: CorpusSettings
    extraction: ExtractionSettings = ExtractionSettings()
    triplets: TripletSettings = TripletSettings()
    gateway: GatewaySettings = GatewaySettings()
    encoding: EncodingSettings = EncodingSettings()
    bm25: Bm25Settings = Bm25Settings()
    mining: MiningSettings = MiningSettings()
    training: TrainingSettings = TrainingSettings()
    evaluation: EvaluationSettings = EvaluationSettings()
    similarity_kind: Literal["dot", "cosine"] = "cosine"
    k: int = Field(5, ge=1)
    seeds: List[int] = Field(default_factory=lambda: [13], min_length=1)

    @model_validator(mode="before")
    @classmethod
    def _headings_follow_conclusion(cls, data: Any) -> Any:
        if not isinstance(data, dict):
            return data
        corpus = data.get("corpus")
        segmentation = corpus.get("segmentation") if isinstance(corpus, dict) else None
        if not isinstance(segmentation, dict) or "conclusion_patterns" not in segmentation:
            return data
        extraction = data.get("extraction") or {}
        if not isinstance(extraction, dict) or "judgement_headings" in extraction:
            return data
        return {**data, "extraction": {**extraction, "judgement_headings": segmentation["conclusion_patterns"]}}

    @model_validator(mode="after")
    def _conclusion_headings_extractable(self) -> "PipelineConfig":
        headings = set(self.extraction.judgement_headings)
        missing = [p for p in self.corpus.segmentation.conclusion_patterns if p not in headings]
        if missing:
            raise ValueError(
                f"extraction.judgement_headings lacks conclusion pattern(s) {missing}; "
                "judgements after those headings would never be found"
            )
        return self

    def section_hash(self, *names: str) -> str:
        """
        Content hash of the named sections (or top-level values).
        """
        dumped = self.model_dump(mode="json")
        return content_hash({name: dumped[name] for name in names})

    def fingerprint(self) -> str:
        return content_hash(self.model_dump(mode="json"))


def _section_model(annotation: Any) -> Optional[Type[BaseModel]]:
    for candidate in (annotation, *typing.get_args(annotation)):
        if isinstance(candidate, type) and issubclass(candidate, BaseModel):
            return candidate
    return None


def _known_keys(loc: Tuple[Union[str, int], ...]) -> List[str]:
    model: Optional[Type[BaseModel]] = PipelineConfig
    for part in loc:
        if model is None or part not in model.model_fields:
            return []
        model = _section_model(model.model_fields[part].annotation)
    return list(model.model_fields) if model is not None else []


def _describe(error: Dict[str, Any]) -> str:
    loc = tuple(error["loc"])
    where = ".".join(str(p) for p in loc[:-1]) or "top level"
    if error["type"] == "extra_forbidden":
        key = str(loc[-1])
        message = f"unknown key '{key}' in {where}"
        close = difflib.get_close_matches(key, _known_keys(loc[:-1]), n=1)
        return f"{message}; did you mean '{close[0]}'?" if close else message
    field = ".".join(str(p) for p in loc) or "config"
    return f"{field}: {error['msg']}"


def parse_config(data: Any, base_dir: Optional[Path] = None, check_paths: bool = True) -> PipelineConfig:
    """
    Validate a config mapping.

    Args:
        data (Any): Parsed YAML.
        base_dir (Optional[Path]): Directory relative paths are resolved against.
        check_paths (bool): Whether referenced input paths must exist.

    Returns:
        PipelineConfig: The normalized config.
    """
    if not isinstance(data, dict):
        raise ConfigError("config must be a mapping")
    try:
        return PipelineConfig.model_validate(data, context={"base_dir": base_dir, "check_paths": check_paths})
    except ValidationError as exc:
        raise ConfigError("; ".join(_describe(e) for e in exc.errors())) from exc


def load_config(path: Union[str, Path], check_paths: bool = True) -> PipelineConfig:
    """
    Read and validate a YAML config file.
    """
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    try:
        data = yaml.safe_load(path.read_text(encoding="utf-8"))
    except yaml.YAMLError as exc:
        raise ConfigError(f"config file {path} does not parse: {exc}") from exc
    config = parse_config(data or {}, base_dir=path.resolve().parent, check_paths=check_paths)
    logger.debug("Loaded config %s (fingerprint %s)", path, config.fingerprint()[:12])
    return config


def dump_config(config: PipelineConfig) -> str:
    """
    The normalized config as YAML, defaults filled.
    """
    return yaml.safe_dump(config.model_dump(mode="json"), sort_keys=False, default_flow_style=False)


def validate_config(path: Union[str, Path]) -> Tuple[PipelineConfig, str]:
    """
    Load a config file and render it with every default filled.

    Args:
        path (Union[str, Path]): YAML config file.

    Returns:
        Tuple[PipelineConfig, str]: The config and its normalized YAML.
    """
    config = load_config(path)
    return config, dump_config(config)
