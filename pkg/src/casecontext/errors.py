"""
Exception hierarchy for the CaseContext pipeline.

Every error carries the exit code the command line reports for it.
"""
from typing import Optional


class CaseContextError(Exception):
    """
    Base class for all pipeline errors.
    """
    exit_code = 4


class ConfigError(CaseContextError, ValueError):
    """
    Invalid or unreadable pipeline configuration.
    """
    exit_code = 2


class MissingArtifactError(CaseContextError):
    """
    A stage input is missing; names the stage that produces it.
    """
    exit_code = 3

    def __init__(self, artifact: str, stage: str):
        super().__init__(f"missing artifact '{artifact}': run stage '{stage}' first")
        self.artifact = artifact
        self.stage = stage


class CorpusError(CaseContextError):
    """
    Corpus ingestion or persistence failure.
    """


class ExtractionError(CaseContextError, ValueError):
    """
    Invalid extraction configuration or input.
    """


class TripletImportError(CaseContextError):
    """
    Malformed record in an imported triplet file.
    """

    def __init__(self, path: str, line_number: int, reason: str):
        super().__init__(f"{path}: line {line_number}: {reason}")
        self.path = path
        self.line_number = line_number


class GatewayError(CaseContextError):
    """
    Backend failure after the retry policy is exhausted, or an error payload.
    """

    def __init__(self, message: str, status: Optional[int] = None):
        super().__init__(f"{message} (status {status})" if status is not None else message)
        self.status = status


class TranscriptMissError(GatewayError):
    """
    Replay mode met a request that was never recorded.
    """

    def __init__(self, request_hash: str):
        super().__init__(f"transcript miss for request {request_hash}")
        self.request_hash = request_hash


class EncodingError(CaseContextError, ValueError):
    """
    Template, budget, dimension or normalization problem while encoding.
    """


class Bm25Error(CaseContextError, ValueError):
    """
    BM25 index construction or lookup failure.
    """


class RetrievalError(CaseContextError, ValueError):
    """
    Dense search or run production failure.
    """


class TrainingError(CaseContextError):
    """
    Training could not run or diverged.
    """


class DegenerateLossError(TrainingError, ValueError):
    """
    The contrastive loss was asked for with no negatives at all.
    """


class BatchConstructionError(TrainingError, ValueError):
    """
    A training example would use its own positive or query as a negative.
    """


class NonFiniteLossError(TrainingError):
    """
    The loss of a batch became NaN or infinite.
    """

    def __init__(self, query_id: str, value: float):
        super().__init__(f"non-finite loss {value!r} for query '{query_id}'")
        self.query_id = query_id
        self.value = value


class MetricsError(CaseContextError, ValueError):
    """
    Invalid evaluation input.
    """
