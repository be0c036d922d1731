from typing import Optional


class GaugelineError(Exception):
    """Base error of the gaugeline library"""

    default_ec: Optional[str] = None
    default_exit_code: int = 65

    def __init__(
        self,
        message: str = "The requested computation could not be carried out.",
        ec: str | None = None,
        exit_code: int | None = None,
    ):
        ec = ec if ec is not None else self.default_ec
        self._ec = ec
        self._message = f"{ec}: {message}" if ec else message
        self._exit_code = self.default_exit_code if exit_code is None else exit_code
        super().__init__(self.message)

    @property
    def exit_code(self):
        return self._exit_code

    @property
    def message(self):
        return self._message

    @property
    def ec(self):
        return self._ec

    @exit_code.setter
    def exit_code(self, value):
        self._exit_code = value

    @message.setter
    def message(self, value):
        self._message = value

    @ec.setter
    def ec(self, value):
        self._ec = value


class DomainError(GaugelineError):
    """Argument outside the represented domain or invalid parameters."""

    default_ec = "GAU_001"


class RangeError(GaugelineError):
    """Radius above the supremum of the gauge."""

    default_ec = "GAU_002"


class MisalignedConstraintError(GaugelineError):
    default_ec = "ENV_001"


class HypothesisError(GaugelineError):
    """A constraint sequence violates the growth hypotheses at `index`."""

    default_ec = "ENV_002"

    def __init__(self, message: str, index: int):
        self.index = index
        super().__init__(message=f"{message} (index {index})")


class SolverLimitError(GaugelineError):
    default_ec = "ENV_003"


class InsufficientBallsError(GaugelineError):
    """Fewer disconnected balls than the requested certificate depth."""

    default_ec = "GEO_001"

    def __init__(self, found: int, requested: int):
        self.found = found
        self.requested = requested
        super().__init__(
            message=f"found {found} admissible disconnected balls, {requested} requested"
        )


class NonMonotoneGaugeError(GaugelineError):
    default_ec = "DIM_001"


class CoverageGapError(GaugelineError):
    default_ec = "HEX_001"

    def __init__(self, cell: tuple[int, int], value: float):
        self.cell = cell
        self.value = value
        super().__init__(
            message=f"image {value} of cell {cell} is in neither cover family"
        )


class NullHomotopicLoopError(GaugelineError):
    default_ec = "HEX_002"


class ConfigParseError(GaugelineError):
    default_ec = "CLI_001"
    default_exit_code = 64


__all__ = [
    "GaugelineError",
    "DomainError",
    "RangeError",
    "MisalignedConstraintError",
    "HypothesisError",
    "SolverLimitError",
    "InsufficientBallsError",
    "NonMonotoneGaugeError",
    "CoverageGapError",
    "NullHomotopicLoopError",
    "ConfigParseError",
]
