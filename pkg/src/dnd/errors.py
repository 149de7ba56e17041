"""Shared exception types."""


class DndError(Exception):
    """Base class for all errors raised by this package."""


class DimensionError(DndError, ValueError):
    """Operand shapes are incompatible with the requested operation."""


class ContractError(DndError, RuntimeError):
    """A caller violated an operation precondition (non-shape)."""


class ValidationError(DndError, ValueError):
    """A config, spec, or dataset failed validation."""


class SearchFailure(DndError, RuntimeError):
    """Architecture search produced no candidate above the accuracy floor."""

    def __init__(self, best_accuracy: float):
        self.best_accuracy = best_accuracy
        super().__init__(
            f"no candidate reached the accuracy floor (best seen: {best_accuracy:.4f})"
        )


class StageError(DndError, RuntimeError):
    """An experiment stage failed; carries the stage name and config hash."""

    def __init__(self, stage: str, config_hash: str, cause: Exception):
        self.stage = stage
        self.config_hash = config_hash
        super().__init__(f"stage '{stage}' failed (config {config_hash[:12]}): {cause}")
