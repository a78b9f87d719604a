import json
from enum import Enum


class ErrorCode(Enum):
    VALIDATION = 10001
    SHAPE_MISMATCH = 10002
    SUPPORT_STRUCTURE = 10003
    TOTAL_SUPPORT = 10004
    SUPPORT_RANK = 10005
    CONFIG = 10006
    DATA_FILE = 10007
    SINKHORN_STRUCTURE = 20001
    SINKHORN_CONVERGENCE = 20002
    PROJECTION_CONVERGENCE = 20003
    RETRACTION_OVERFLOW = 20004
    INVARIANT_VIOLATION = 20005


class PolyOTException(Exception):
    def __init__(self, code: int = 0, msg: str = "", context: dict | None = None):
        super().__init__(msg)
        self.code = code
        self.msg = msg
        self.context = context or {}

    def __str__(self):
        return json.dumps({"code": self.code, "msg": self.msg, "context": self.context}, default=str)

    __repr__ = __str__


class SetupException(PolyOTException):
    """Bad input, bad configuration or an ill-posed problem; nothing was iterated."""


class NumericalException(PolyOTException):
    """An iterative kernel failed on a well-posed input."""


class ValidationException(SetupException):
    def __init__(self, msg: str = "", context: dict | None = None):
        super().__init__(ErrorCode.VALIDATION.value, msg, context)


class ShapeMismatchException(SetupException):
    def __init__(self, msg: str = "", context: dict | None = None):
        super().__init__(ErrorCode.SHAPE_MISMATCH.value, msg, context)


class SupportStructureException(SetupException):
    def __init__(self, msg: str = "", context: dict | None = None):
        super().__init__(ErrorCode.SUPPORT_STRUCTURE.value, msg, context)


class TotalSupportException(SetupException):
    def __init__(self, msg: str = "", context: dict | None = None):
        super().__init__(ErrorCode.TOTAL_SUPPORT.value, msg, context)


class SupportRankException(SetupException):
    def __init__(self, msg: str = "", context: dict | None = None):
        super().__init__(ErrorCode.SUPPORT_RANK.value, msg, context)


class ConfigException(SetupException):
    def __init__(self, msg: str = "", context: dict | None = None):
        super().__init__(ErrorCode.CONFIG.value, msg, context)


class DataFileException(SetupException):
    def __init__(self, msg: str = "", context: dict | None = None):
        super().__init__(ErrorCode.DATA_FILE.value, msg, context)


class SinkhornStructureException(NumericalException):
    def __init__(self, msg: str = "", context: dict | None = None):
        super().__init__(ErrorCode.SINKHORN_STRUCTURE.value, msg, context)


class SinkhornConvergenceException(NumericalException):
    def __init__(self, msg: str = "", residual: float = float("nan"), context: dict | None = None):
        super().__init__(ErrorCode.SINKHORN_CONVERGENCE.value, msg, context)
        self.residual = residual
        self.context.setdefault("residual", residual)


class ProjectionConvergenceException(NumericalException):
    def __init__(self, msg: str = "", residual: float = float("nan"), context: dict | None = None):
        super().__init__(ErrorCode.PROJECTION_CONVERGENCE.value, msg, context)
        self.residual = residual
        self.context.setdefault("residual", residual)


class RetractionOverflowException(NumericalException):
    def __init__(self, msg: str = "", exponent: float = float("nan"), context: dict | None = None):
        super().__init__(ErrorCode.RETRACTION_OVERFLOW.value, msg, context)
        self.exponent = exponent
        self.context.setdefault("exponent", exponent)


class InvariantViolationException(NumericalException):
    def __init__(self, msg: str = "", context: dict | None = None):
        super().__init__(ErrorCode.INVARIANT_VIOLATION.value, msg, context)

