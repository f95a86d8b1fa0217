class TrainerError(Exception):
    """Base class for every failure this package raises on purpose."""


class JobError(TrainerError):
    """The job file is missing, malformed, or missing required fields."""


class ModelLoadError(TrainerError):
    """Unknown model id or unreadable checkpoint."""


class EmptyCorpus(TrainerError):
    """The training document file contains no usable text."""
