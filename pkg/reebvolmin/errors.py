"""Exception hierarchy for reebvolmin."""

from __future__ import annotations

from enum import StrEnum
from typing import Any


class GoodnessReason(StrEnum):
    """Why a diagram fails the goodness condition."""

    not_independent = "not-independent"
    lattice_saturation_fails = "lattice-saturation-fails"
    not_primitive = "not-primitive"
    not_minimal = "not-minimal"


class ReebVolminError(Exception):
    """Base class for every error raised by reebvolmin."""

    def details(self) -> dict[str, Any]:
        """Extra fields for the JSON error object."""
        return {}


class InputError(ReebVolminError):
    """Raised when an input document violates its schema."""

    def __init__(self, message: str, pointer: str = "") -> None:
        super().__init__(message)
        self.pointer = pointer

    @classmethod
    def at(cls, pointer: str, detail: str) -> InputError:
        """Build an input error located by a JSON pointer."""
        where = pointer or "/"
        return cls(f"Invalid input at {where}: {detail}", pointer=pointer)

    def details(self) -> dict[str, Any]:
        return {"pointer": self.pointer}


class ConfigError(ReebVolminError):
    """Raised when an environment variable cannot be parsed."""

    @classmethod
    def for_variable(cls, name: str, value: str) -> ConfigError:
        """Build a config error for a malformed environment variable."""
        return cls(f"Environment variable {name} has an invalid value: {value!r}")


class DiagramError(ReebVolminError):
    """Raised when a toric diagram is malformed."""

    def __init__(
        self,
        message: str,
        reason: GoodnessReason | None = None,
        indices: tuple[int, ...] = (),
    ) -> None:
        super().__init__(message)
        self.reason = reason
        self.indices = indices

    @classmethod
    def zero_normal(cls) -> DiagramError:
        """Build the error for a zero normal vector."""
        return cls("zero normal")

    @classmethod
    def not_minimal(cls, redundant: list[int]) -> DiagramError:
        """Build the error for a normal set containing redundant normals."""
        listed = ", ".join(str(i) for i in redundant)
        return cls(
            f"normals {listed} are redundant; drop them before checking goodness",
            reason=GoodnessReason.not_minimal,
            indices=tuple(redundant),
        )

    @classmethod
    def degenerate(cls, detail: str) -> DiagramError:
        """Build the error for a cone without interior or with a lineality space."""
        return cls(f"degenerate cone: {detail}")

    def details(self) -> dict[str, Any]:
        fields: dict[str, Any] = {}
        if self.reason is not None:
            fields["reason"] = str(self.reason)
        if self.indices:
            fields["indices"] = list(self.indices)
        return fields


class NotGoodError(ReebVolminError):
    """Raised when a pipeline step needs a good diagram and gets a bad one."""

    def __init__(self, message: str, report: Any = None) -> None:
        super().__init__(message)
        self.report = report

    def details(self) -> dict[str, Any]:
        if self.report is None:
            return {}
        return {"goodness": self.report.to_json()}


class NoHeightError(ReebVolminError):
    """Raised when a diagram has no height normalization."""


class UnboundedTruncationError(ReebVolminError):
    """Raised when the Reeb vector is not interior, so the truncation is unbounded."""

    @classmethod
    def for_reeb(cls, xi: tuple[Any, ...]) -> UnboundedTruncationError:
        """Build the error for a Reeb vector outside the open dual cone."""
        shown = ", ".join(str(x) for x in xi)
        return cls(f"unbounded truncation: ({shown}) is not interior to the Reeb cone")


class DegenerateVolumeError(ReebVolminError):
    """Raised when a polytope is flat."""


class OffSliceError(ReebVolminError):
    """Raised when a Reeb vector is not on the characteristic slice."""


class CutoffError(ReebVolminError):
    """Raised when a charge cutoff is too small for the heat-trace tail bound."""

    def __init__(self, message: str, required: float) -> None:
        super().__init__(message)
        self.required = required

    @classmethod
    def insufficient(cls, given: float, required: float) -> CutoffError:
        """Build the error for a cutoff below the required one."""
        return cls(
            f"cutoff {given} is too small for the heat-trace tail bound; need at least {required}",
            required=required,
        )

    def details(self) -> dict[str, Any]:
        return {"required_cutoff": self.required}


class ChargeError(ReebVolminError):
    """Raised for invalid charge values."""


class NotFanoError(ReebVolminError):
    """Raised when a weighted hypersurface violates the Fano condition."""

    @classmethod
    def for_weights(cls, total: int, degree: int) -> NotFanoError:
        """Build the error for |w| <= d."""
        return cls(f"not Fano: |w| = {total} must exceed d = {degree}")


class SampleError(ReebVolminError):
    """Raised when Hilbert samples are not polynomial of the stated degree."""

    def __init__(self, message: str, k: int | None = None) -> None:
        super().__init__(message)
        self.k = k

    @classmethod
    def at_k(cls, k: int, series: str) -> SampleError:
        """Build the error for a sample that breaks polynomiality."""
        return cls(f"{series}_k is not polynomial of stated degree: sample k={k} disagrees", k=k)

    def details(self) -> dict[str, Any]:
        return {} if self.k is None else {"k": self.k}
