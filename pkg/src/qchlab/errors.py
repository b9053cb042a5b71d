"""Exception hierarchy. Every exception carries a stable machine-readable code."""

from __future__ import annotations


class QCHLabError(Exception):
    """Base class for all qchlab errors."""

    code = "E_GENERIC"

    def __init__(self, message: str):
        super().__init__(f"[{self.code}] {message}")
        self.message = message


class DimensionError(QCHLabError):
    code = "E_DIM"


class NotHermitianError(QCHLabError):
    code = "E_NOT_HERMITIAN"


class ConvergenceError(QCHLabError):
    code = "E_NO_CONVERGENCE"


class UnknownVertexError(QCHLabError):
    code = "E_VERTEX"


class CyclicGraphError(QCHLabError):
    code = "E_CTC"


class NotAcausalError(QCHLabError):
    code = "E_NOT_ACAUSAL"


class PathBudgetError(QCHLabError):
    code = "E_TOO_LARGE"


class NotCompletelyPositiveError(QCHLabError):
    code = "E_NOT_CP"


class NotUnitaryError(QCHLabError):
    code = "E_NOT_UNITARY"


class MissingEdgeError(QCHLabError):
    code = "E_MISSING_EDGE"


class CKRelationsError(QCHLabError):
    code = "E_CK_FAIL"


class DegenerateSplitError(QCHLabError):
    code = "E_DEGENERATE"


class UnknownGateError(QCHLabError):
    code = "E_GATE"


class GateArityError(QCHLabError):
    code = "E_ARITY"


class LayerOverlapError(QCHLabError):
    code = "E_OVERLAP"


class InvalidInstanceError(QCHLabError):
    """Raised when an axiom check is asked to run on an instance that fails validation."""

    code = "E_INVALID_INSTANCE"


class InputFormatError(QCHLabError):
    """Malformed or schema-violating input document."""

    code = "E_INPUT"
