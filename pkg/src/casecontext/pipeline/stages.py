"""
Pipeline stages: each reads artifacts from the workspace, writes its own,
and records a manifest line.
"""
import logging
import os
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import pandas as pd

from casecontext.api.client import ChatApiClient
from casecontext.api.gateway import Gateway
from casecontext.api.mock import MockBackend
from casecontext.api.models import DecodeParams
from casecontext.corpus.language import LanguageFilterConfig
from casecontext.corpus.segment import SegmentationRules
from casecontext.corpus.store import CorpusLayout, ingest_corpus, load_corpus, save_corpus
from casecontext.corpus.synthetic import write_synthetic_corpus
from casecontext.encoding.adapter import Adapter, load_checkpoint, save_checkpoint
from casecontext.encoding.backends import EmbeddingBackend, GatewayEmbeddingBackend, LocalEmbeddingBackend
from casecontext.encoding.context import ContextualisedCase, generate_reasoning_many, render_context
from casecontext.encoding.store import encode_contexts, load_store, save_store
from casecontext.errors import ConfigError
from casecontext.evaluation.compare import compare_reports, results_frame
from casecontext.evaluation.metrics import MetricsReport, evaluate_run
from casecontext.evaluation.qrels import Qrels, load_qrels, write_qrels
from casecontext.evaluation.report import format_table, write_report
from casecontext.extraction.elements import extract_elements
from casecontext.extraction.models import CaseTriplets, JudgementRules, LegalElements, PlaceholderConfig
from casecontext.extraction.triplets import case_triplets
from casecontext.pipeline.config import PipelineConfig
from casecontext.pipeline.manifest import Manifest, ManifestEntry, hash_files
from casecontext.retrieval.bm25 import (
    Analyzer,
    Bm25Params,
    build_bm25,
    bm25_run,
    default_stopwords,
    load_index,
    mine_hard_negatives,
    read_hard_negatives,
    save_index,
    write_hard_negatives,
)
from casecontext.retrieval.models import meta_path, read_run, write_run
from casecontext.retrieval.vector_index import produce_run
from casecontext.training.trainer import TrainConfig, evaluate_loss, train
from casecontext.utils.helpers import read_json, read_jsonl, write_json, write_jsonl
from casecontext.visualizations.training import loss_curve_figure, write_figure

logger = logging.getLogger(__name__)

STAGES = (
    "ingest", "extract", "triplets", "reason", "encode", "index",
    "mine", "train", "retrieve", "eval", "compare", "report",
)


def build_gateway(config: PipelineConfig, workspace: Path) -> Gateway:
    """
    The gateway described by the ``gateway`` section.

    ``CASECONTEXT_BASE_URL`` overrides ``gateway.base_url``. Record and replay
    modes default to ``<workspace>/transcript.jsonl``.
    """
    settings = config.gateway
    if settings.backend == "mock":
        backend = MockBackend(settings.mock_seed, settings.mock_dim, settings.mock_summary_words)
    else:
        backend = ChatApiClient(
            base_url=os.getenv("CASECONTEXT_BASE_URL") or settings.base_url,
            chat_model=settings.chat_model,
            embedding_model=settings.embedding_model,
            timeout=settings.timeout,
            max_retries=settings.max_retries,
            backoff_seconds=settings.backoff_seconds
        )
    transcript = settings.transcript
    if transcript is None and settings.mode != "live":
        transcript = workspace / "transcript.jsonl"
    return Gateway(backend, settings.mode, transcript, settings.max_in_flight)


@dataclass
class StageContext:
    """
    What a stage needs: the config, the workspace and the selected seeds.
    """
    config: PipelineConfig
    workspace: Path
    seeds: List[int]
    _gateway: Optional[Gateway] = field(default=None, repr=False)

    def path(self, *parts: str) -> Path:
        return self.workspace.joinpath(*parts)

    @property
    def gateway(self) -> Gateway:
        if self._gateway is None:
            self._gateway = build_gateway(self.config, self.workspace)
        return self._gateway

    @property
    def decode(self) -> DecodeParams:
        return DecodeParams(self.config.gateway.temperature, self.config.gateway.max_output_tokens)

    def embedding_backend(self) -> EmbeddingBackend:
        settings = self.config.encoding
        if settings.embedder == "local":
            return LocalEmbeddingBackend(settings.local_dim, settings.local_seed)
        return GatewayEmbeddingBackend(self.gateway, settings.batch_size)

    def seed_tag(self, seed: int) -> str:
        return f"seed-{seed}"

    def run_names(self) -> List[str]:
        return ["bm25", "base", *(self.seed_tag(s) for s in self.seeds)]


# -- artifact helpers --------------------------------------------------------

def _eval_qrels(ctx: StageContext) -> Qrels:
    return load_qrels(ctx.path("qrels.tsv"))


def _train_qrels(ctx: StageContext) -> Qrels:
    train_qrels = ctx.config.training.train_qrels
    if train_qrels is None:
        return _eval_qrels(ctx)
    return load_qrels(train_qrels, ctx.config.training.train_qrels_format)


def _train_qrels_path(ctx: StageContext) -> Path:
    return ctx.config.training.train_qrels or ctx.path("qrels.tsv")


def _read_elements(path: Path) -> List[LegalElements]:
    return [LegalElements.from_record(r) for r in read_jsonl(path)]


def _read_triplets(path: Path) -> Dict[str, CaseTriplets]:
    triplets = (CaseTriplets.from_record(r) for r in read_jsonl(path))
    return {t.case_id: t for t in triplets}


def _load_corpus(ctx: StageContext):
    return load_corpus(ctx.path("corpus.jsonl"), corpus_id=ctx.config.corpus.corpus_id)


def _evaluated_queries(ctx: StageContext, corpus) -> List[str]:
    qrels = _eval_qrels(ctx)
    missing = [q for q in qrels.queries() if q not in corpus]
    for query_id in missing:
        logger.warning("Query '%s' is not in the corpus; it will score 0", query_id)
    return [q for q in qrels.queries() if q in corpus]


def _store_files(directory: Path, name: str) -> List[Path]:
    return [directory / f"{name}.npy", directory / f"{name}.json"]


def _run_files(ctx: StageContext, name: str) -> List[Path]:
    run = ctx.path("runs", f"{name}.run.tsv")
    return [run, meta_path(run)]


def _adapter_dir(ctx: StageContext, seed: int) -> Path:
    return ctx.path("adapters", ctx.seed_tag(seed))


# -- stages ------------------------------------------------------------------

def _ingest(ctx: StageContext) -> None:
    settings = ctx.config.corpus
    if settings.synthetic:
        root = ctx.path("synthetic")
        write_synthetic_corpus(root, **settings.synthetic.model_dump())
        layout = CorpusLayout(case_glob="*.txt", qrels="qrels.tsv", corpus_id=settings.corpus_id or "synthetic")
    else:
        root = settings.path
        layout = CorpusLayout(
            case_glob=settings.case_glob,
            qrels=str(settings.qrels) if settings.qrels else None,
            qrels_format=settings.qrels_format,
            corpus_id=settings.corpus_id
        )
    segmentation = settings.segmentation
    rules = SegmentationRules(
        background_patterns=tuple(segmentation.background_patterns),
        analysis_patterns=tuple(segmentation.analysis_patterns),
        conclusion_patterns=tuple(segmentation.conclusion_patterns),
        abbreviations=tuple(segmentation.abbreviations)
    )
    handle = ingest_corpus(root, layout, LanguageFilterConfig(threshold=settings.french_threshold), rules)
    save_corpus(ctx.path("corpus.jsonl"), handle)
    write_qrels(ctx.path("qrels.tsv"), handle.qrels or Qrels())
    write_json(ctx.path("stats.json"), {
        "corpus_id": handle.corpus_id,
        **asdict(handle.stats),
        "warnings": handle.warnings,
    })
    logger.info("Corpus statistics:\n%s", handle.stats.to_frame().to_string())


def _ingest_inputs(ctx: StageContext) -> List[Tuple[Path, Optional[str]]]:
    if ctx.config.corpus.synthetic:
        return []
    root = ctx.config.corpus.path
    files = sorted(p for p in root.glob(ctx.config.corpus.case_glob) if p.is_file())
    if ctx.config.corpus.qrels:
        files.append(ctx.config.corpus.qrels)
    return [(p, None) for p in files]


def _extract(ctx: StageContext) -> None:
    settings = ctx.config.extraction
    corpus = _load_corpus(ctx)
    elements = extract_elements(
        [corpus.get(case_id) for case_id in corpus.case_ids()],
        ctx.gateway,
        PlaceholderConfig(tuple(settings.placeholder_tokens)),
        JudgementRules(tuple(settings.judgement_headings), tuple(settings.attribution_patterns)),
        ctx.decode
    )
    write_jsonl(ctx.path("elements.jsonl"), (e.to_record() for e in elements))


def _triplets(ctx: StageContext) -> None:
    import_dir = ctx.config.triplets.import_dir
    triplets = [case_triplets(e, import_dir) for e in _read_elements(ctx.path("elements.jsonl"))]
    write_jsonl(ctx.path("triplets.jsonl"), (t.to_record() for t in triplets))


def _triplets_inputs(ctx: StageContext) -> List[Tuple[Path, Optional[str]]]:
    inputs: List[Tuple[Path, Optional[str]]] = [(ctx.path("elements.jsonl"), "extract")]
    import_dir = ctx.config.triplets.import_dir
    if import_dir:
        inputs += [(p, None) for p in sorted(import_dir.glob("*.jsonl"))]
    return inputs


def _reason(ctx: StageContext) -> None:
    elements = _read_elements(ctx.path("elements.jsonl"))
    triplets = _read_triplets(ctx.path("triplets.jsonl"))
    reasoned = generate_reasoning_many(elements, triplets, ctx.gateway, ctx.decode)
    write_jsonl(ctx.path("elements.reasoned.jsonl"), (e.to_record() for e in reasoned))


def _encode(ctx: StageContext) -> None:
    settings = ctx.config.encoding
    triplets = _read_triplets(ctx.path("triplets.jsonl"))
    contexts: List[ContextualisedCase] = []
    for elements in _read_elements(ctx.path("elements.reasoned.jsonl")):
        case = triplets[elements.case_id]
        contexts.append(render_context(
            elements, case.r_fact, case.r_issue, settings.template_id, settings.budget,
            settings.include_triplets, settings.include_reasoning
        ))
    truncated = sum(1 for c in contexts if c.truncated)
    if truncated:
        logger.info("%d of %d contexts truncated to %d tokens", truncated, len(contexts), settings.budget)
    write_jsonl(ctx.path("contexts.jsonl"), (c.to_record() for c in contexts))
    save_store(ctx.path("embeddings"), "base", encode_contexts(contexts, ctx.embedding_backend()))


def _analyzer(ctx: StageContext) -> Analyzer:
    path = ctx.config.bm25.stopwords
    if path is None:
        return Analyzer(default_stopwords())
    words = [w.strip().lower() for w in path.read_text(encoding="utf-8").splitlines()]
    return Analyzer(frozenset(w for w in words if w and not w.startswith("#")))


def _index(ctx: StageContext) -> None:
    params = Bm25Params(ctx.config.bm25.k1, ctx.config.bm25.b)
    save_index(ctx.path("bm25.json"), build_bm25(_load_corpus(ctx), _analyzer(ctx), params))


def _mine(ctx: StageContext) -> None:
    settings = ctx.config.mining
    index = load_index(ctx.path("bm25.json"))
    corpus = _load_corpus(ctx)
    qrels = _train_qrels(ctx)
    mined = [
        mine_hard_negatives(index, corpus.get(q), qrels.get(q), settings.count, settings.pool_depth)
        for q in qrels.queries() if q in corpus
    ]
    short = sum(1 for m in mined if m.short)
    if short:
        logger.warning("%d of %d queries have fewer than %d hard negatives", short, len(mined), settings.count)
    write_hard_negatives(ctx.path("hard_negatives.tsv"), mined)


def _train_config(ctx: StageContext, seed: int) -> TrainConfig:
    settings = ctx.config.training
    return TrainConfig(
        steps=settings.steps,
        batch_size=settings.batch_size,
        lr=settings.lr,
        weight_decay=settings.weight_decay,
        beta1=settings.beta1,
        beta2=settings.beta2,
        eps=settings.eps,
        temperature=settings.temperature,
        similarity_kind=ctx.config.similarity_kind,
        seed=seed,
        d_out=settings.d_out,
        init_noise=settings.init_noise,
        easy_negatives=settings.easy_negatives,
        checkpoint_every=settings.checkpoint_every,
        log_every=settings.log_every
    )


def _train(ctx: StageContext) -> None:
    store = load_store(ctx.path("embeddings"), "base")
    qrels = _train_qrels(ctx)
    negatives = read_hard_negatives(ctx.path("hard_negatives.tsv"))
    fingerprint = ctx.config.section_hash("training", "similarity_kind", "encoding")
    for seed in ctx.seeds:
        cfg = _train_config(ctx, seed)
        directory = _adapter_dir(ctx, seed)
        initial = Adapter.initialize(store.dimension, cfg.d_out, seed, cfg.init_noise)
        initial_loss = evaluate_loss(store, qrels, negatives, initial, cfg.loss)
        adapter, state = train(store, qrels, negatives, cfg, directory, fingerprint)
        final_loss = evaluate_loss(store, qrels, negatives, adapter, cfg.loss)
        logger.info("Seed %d: evaluation loss %.6f -> %.6f", seed, initial_loss, final_loss)
        save_checkpoint(directory / "adapter.ckpt", adapter, {"step": state.step, "seed": seed, "fingerprint": fingerprint})
        write_json(directory / "loss.json", {
            "seed": seed,
            "steps": state.step,
            "initial_loss": initial_loss,
            "final_loss": final_loss,
            "history": state.loss_history,
        })
        write_figure(loss_curve_figure(state.loss_history, seed), directory / "loss.html", div_id=f"loss-seed-{seed}")


def _train_outputs(ctx: StageContext) -> List[Path]:
    return [
        _adapter_dir(ctx, s) / name
        for s in ctx.seeds
        for name in ("adapter.ckpt", "loss.json", "loss.html")
    ]


def _retrieve(ctx: StageContext) -> None:
    kind = ctx.config.similarity_kind
    k = ctx.config.k
    corpus = _load_corpus(ctx)
    queries = _evaluated_queries(ctx, corpus)
    write_run(ctx.path("runs", "bm25.run.tsv"), bm25_run(load_index(ctx.path("bm25.json")), corpus, queries, k))

    store = load_store(ctx.path("embeddings"), "base")
    base = store.project(None, kind)
    write_run(ctx.path("runs", "base.run.tsv"), produce_run(queries, base, k, {"system": "base"}, kind))
    for seed in ctx.seeds:
        adapter, _ = load_checkpoint(_adapter_dir(ctx, seed) / "adapter.ckpt")
        projected = store.project(adapter, kind)
        tag = ctx.seed_tag(seed)
        save_store(ctx.path("embeddings"), tag, projected)
        write_run(ctx.path("runs", f"{tag}.run.tsv"), produce_run(queries, projected, k, {"system": tag}, kind))


def _eval(ctx: StageContext) -> None:
    qrels = _eval_qrels(ctx)
    for name in ctx.run_names():
        run = read_run(ctx.path("runs", f"{name}.run.tsv"))
        report = evaluate_run(run, qrels, ctx.config.k, ctx.config.evaluation.ap_normalizer)
        write_json(ctx.path("metrics", f"{name}.json"), report.to_record())
        table = pd.DataFrame([report.aggregate], index=[name])
        ctx.path("metrics", f"{name}.txt").write_text(format_table(table), encoding="utf-8")


def _load_report(ctx: StageContext, name: str) -> MetricsReport:
    return MetricsReport.from_record(read_json(ctx.path("metrics", f"{name}.json")))


def _compare(ctx: StageContext) -> None:
    settings = ctx.config.evaluation
    bm25 = _load_report(ctx, "bm25")
    results = {}
    for seed in ctx.seeds:
        tag = ctx.seed_tag(seed)
        tested = compare_reports(_load_report(ctx, tag), bm25, settings.resamples, settings.test_seed)
        results[tag] = {metric: r.to_record() for metric, r in tested.items()}
        logger.info("%s against bm25:\n%s", tag, results_frame(tested).to_string(float_format=lambda v: f"{v:.4f}"))
    write_json(ctx.path("compare.json"), {"baseline": "bm25", "resamples": settings.resamples, "results": results})


def _report(ctx: StageContext) -> None:
    table = write_report(
        ctx.workspace,
        _load_report(ctx, "bm25"),
        _load_report(ctx, "base"),
        {seed: _load_report(ctx, ctx.seed_tag(seed)) for seed in ctx.seeds}
    )
    logger.info("Seed-averaged results (%%):\n%s", format_table(table).rstrip("\n"))


# -- stage table -------------------------------------------------------------

Inputs = Callable[[StageContext], List[Tuple[Path, Optional[str]]]]
Outputs = Callable[[StageContext], List[Path]]


@dataclass(frozen=True)
class Stage:
    """
    A stage: its config sections, input artifacts with their producing
    stage, output artifacts and body.
    """
    name: str
    sections: Tuple[str, ...]
    inputs: Inputs
    outputs: Outputs
    body: Callable[[StageContext], None]
    seeded: bool = False


def _needs(*items: Tuple[str, str]) -> Inputs:
    return lambda ctx: [(ctx.path(*name.split("/")), stage) for name, stage in items]


def _makes(*names: str) -> Outputs:
    return lambda ctx: [ctx.path(*name.split("/")) for name in names]


def _retrieve_inputs(ctx: StageContext) -> List[Tuple[Path, Optional[str]]]:
    inputs = _needs(("corpus.jsonl", "ingest"), ("qrels.tsv", "ingest"), ("bm25.json", "index"))(ctx)
    inputs += [(p, "encode") for p in _store_files(ctx.path("embeddings"), "base")]
    inputs += [(_adapter_dir(ctx, s) / "adapter.ckpt", "train") for s in ctx.seeds]
    return inputs


def _retrieve_outputs(ctx: StageContext) -> List[Path]:
    outputs = [p for name in ctx.run_names() for p in _run_files(ctx, name)]
    outputs += [p for s in ctx.seeds for p in _store_files(ctx.path("embeddings"), ctx.seed_tag(s))]
    return outputs


def _eval_inputs(ctx: StageContext) -> List[Tuple[Path, Optional[str]]]:
    inputs = [(p, "retrieve") for name in ctx.run_names() for p in _run_files(ctx, name)]
    return inputs + [(ctx.path("qrels.tsv"), "ingest")]


def _metric_files(ctx: StageContext, names: Sequence[str], suffix: str = "json") -> List[Path]:
    return [ctx.path("metrics", f"{name}.{suffix}") for name in names]


def _report_inputs(ctx: StageContext) -> List[Tuple[Path, Optional[str]]]:
    inputs = [(p, "eval") for p in _metric_files(ctx, ctx.run_names())]
    inputs += [(p, "eval") for p in _metric_files(ctx, ctx.run_names(), "txt")]
    inputs += [(ctx.path("compare.json"), "compare"), (ctx.path("stats.json"), "ingest")]
    inputs += [(ctx.path("contexts.jsonl"), "encode")]
    inputs += [(p, "train") for p in _train_outputs(ctx) if p.name != "adapter.ckpt"]
    inputs += [(p, "retrieve") for s in ctx.seeds for p in _store_files(ctx.path("embeddings"), ctx.seed_tag(s))]
    return inputs


PIPELINE: Dict[str, Stage] = {stage.name: stage for stage in (
    Stage("ingest", ("corpus",), _ingest_inputs, _makes("corpus.jsonl", "qrels.tsv", "stats.json"), _ingest),
    Stage(
        "extract", ("extraction", "gateway"),
        _needs(("corpus.jsonl", "ingest")), _makes("elements.jsonl"), _extract
    ),
    Stage("triplets", ("triplets",), _triplets_inputs, _makes("triplets.jsonl"), _triplets),
    Stage(
        "reason", ("gateway",),
        _needs(("elements.jsonl", "extract"), ("triplets.jsonl", "triplets")),
        _makes("elements.reasoned.jsonl"), _reason
    ),
    Stage(
        "encode", ("encoding", "gateway"),
        _needs(("elements.reasoned.jsonl", "reason"), ("triplets.jsonl", "triplets")),
        _makes("contexts.jsonl", "embeddings/base.npy", "embeddings/base.json"), _encode
    ),
    Stage("index", ("bm25",), _needs(("corpus.jsonl", "ingest")), _makes("bm25.json"), _index),
    Stage(
        "mine", ("mining",),
        lambda ctx: [
            (ctx.path("bm25.json"), "index"), (ctx.path("corpus.jsonl"), "ingest"), (_train_qrels_path(ctx), "ingest")
        ],
        _makes("hard_negatives.tsv"), _mine
    ),
    Stage(
        "train", ("training", "similarity_kind"),
        lambda ctx: [
            *[(p, "encode") for p in _store_files(ctx.path("embeddings"), "base")],
            (_train_qrels_path(ctx), "ingest"), (ctx.path("hard_negatives.tsv"), "mine"),
        ],
        _train_outputs, _train, seeded=True
    ),
    Stage("retrieve", ("k", "similarity_kind"), _retrieve_inputs, _retrieve_outputs, _retrieve, seeded=True),
    Stage(
        "eval", ("k", "evaluation"), _eval_inputs,
        lambda ctx: _metric_files(ctx, ctx.run_names()) + _metric_files(ctx, ctx.run_names(), "txt"),
        _eval, seeded=True
    ),
    Stage(
        "compare", ("evaluation",),
        lambda ctx: [(p, "eval") for p in _metric_files(ctx, ["bm25", *(ctx.seed_tag(s) for s in ctx.seeds)])],
        _makes("compare.json"), _compare, seeded=True
    ),
    Stage(
        "report", ("k",), _report_inputs,
        _makes("report.json", "report.txt", "report.html"), _report, seeded=True
    ),
)}


def _stage_key(stage: Stage, ctx: StageContext) -> str:
    if not stage.seeded:
        return stage.name
    return f"{stage.name}[seeds={','.join(str(s) for s in ctx.seeds)}]"


def run_stage(
    stage: str,
    config: PipelineConfig,
    workspace: Union[str, Path],
    seed: Optional[int] = None,
    force: bool = False,
    context: Optional[StageContext] = None
) -> Optional[ManifestEntry]:
    """
    Run one stage unless its manifest entry shows it is up to date.

    Args:
        stage (str): Stage name.
        config (PipelineConfig): Validated config.
        workspace (Union[str, Path]): Artifact directory.
        seed (Optional[int]): Restrict seeded stages to this seed.
        force (bool): Run even when up to date.
        context (Optional[StageContext]): Context to reuse across stages.

    Returns:
        Optional[ManifestEntry]: The new manifest entry, or None when skipped.
    """
    if stage not in PIPELINE:
        raise ConfigError(f"unknown stage '{stage}'; expected one of {', '.join(STAGES)}")
    definition = PIPELINE[stage]
    workspace = Path(workspace)
    workspace.mkdir(parents=True, exist_ok=True)
    ctx = context or StageContext(config, workspace, [seed] if seed is not None else list(config.seeds))

    inputs: Dict[str, str] = {}
    for producer in sorted({p for _, p in definition.inputs(ctx) if p is not None}):
        paths = [path for path, p in definition.inputs(ctx) if p == producer]
        inputs.update(hash_files(workspace, paths, producer))
    inputs.update(hash_files(workspace, [path for path, p in definition.inputs(ctx) if p is None]))
    inputs[f"config:{','.join(definition.sections)}"] = config.section_hash(*definition.sections)

    key = _stage_key(definition, ctx)
    manifest = Manifest.load(workspace / "manifest.jsonl")
    if not force and manifest.is_up_to_date(key, inputs, workspace):
        logger.info("Stage %s is up to date", key)
        return None

    logger.info("Running stage %s", key)
    started = time.perf_counter()
    definition.body(ctx)
    duration = time.perf_counter() - started
    entry = ManifestEntry(key, inputs, hash_files(workspace, definition.outputs(ctx)), duration)
    manifest.append(entry)
    logger.info("Stage %s finished in %.2fs (%d outputs)", key, duration, len(entry.outputs))
    return entry


def run_all(
    config: PipelineConfig,
    workspace: Union[str, Path],
    seed: Optional[int] = None,
    force: bool = False
) -> List[Optional[ManifestEntry]]:
    """
    Run every stage in order, sharing one gateway.
    """
    workspace = Path(workspace)
    ctx = StageContext(config, workspace, [seed] if seed is not None else list(config.seeds))
    return [run_stage(name, config, workspace, seed, force, context=ctx) for name in STAGES]
