"""Exception types shared across the package."""


class HrpError(Exception):
    """Base class for all errors raised by hrpembed."""


class InvalidArgumentError(HrpError, ValueError):
    pass


class ShapeError(HrpError, ValueError):
    pass


class UndefinedCorrelationError(HrpError, ValueError):
    pass


class TrainingDivergedError(HrpError, ArithmeticError):
    def __init__(self, epoch, loss=float("nan")):
        super().__init__(f"training diverged at epoch {epoch} (loss={loss})")
        self.epoch = epoch
        self.loss = loss


class ParseError(HrpError, ValueError):
    def __init__(self, message, offset=None):
        if offset is not None:
            message = f"{message} (byte offset {offset})"
        super().__init__(message)
        self.offset = offset


class UnsupportedFormatError(HrpError, ValueError):
    pass


class CorruptionError(HrpError, ValueError):
    pass
