"""Exception hierarchy shared across the pipeline."""

from __future__ import annotations


class PipelineError(Exception):
    """Base class for every error raised by this package."""


class TransportError(PipelineError):
    """A remote source or backend could not be reached at all."""

    def __init__(self, message: str, target: str | None = None):
        super().__init__(message)
        self.target = target


class GenerationError(PipelineError):
    """A single generation request failed; the run can continue."""


class FormatError(PipelineError):
    """A file does not match its documented layout."""

    def __init__(self, message: str, path: str | None = None, line: int | None = None):
        if line is not None:
            message = f"{message} (line {line})"
        if path is not None:
            message = f"{path}: {message}"
        super().__init__(message)
        self.path = path
        self.line = line


class ProviderError(PipelineError):
    """A sentiment or embedding provider failed to produce a result."""


class UndefinedMetricError(PipelineError):
    """A metric has no defined value for the given inputs."""


class DegenerateSampleError(PipelineError):
    """A statistical test received a sample it cannot operate on."""


class ConfigurationError(PipelineError):
    """A config file, model, or provider is set up inconsistently."""


class TrainingDivergedError(PipelineError):
    """A non-finite loss was observed; a diagnostic checkpoint was written."""

    def __init__(self, message: str, checkpoint: str | None = None):
        super().__init__(message)
        self.checkpoint = checkpoint
