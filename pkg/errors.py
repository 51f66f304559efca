"""
Exceptions raised by the scattering library.
"""


class ScatteringError(Exception):
    """Root of every error raised by this package."""


class ValidationError(ScatteringError):
    """Input data does not describe a valid object."""


class SingularMatrix(ScatteringError):
    def __init__(self, message="matrix is singular", pivot=None):
        super().__init__(message)
        self.pivot = pivot


class SingularDelta(SingularMatrix):
    """Delta = H_C - E has no usable inverse at this energy."""


class SingularSystem(SingularMatrix):
    """The augmented center + lead system cannot be solved."""


class IndexOutOfRange(ScatteringError):
    pass


class DimensionMismatch(ValidationError):
    pass


class NotHermitian(ValidationError):
    def __init__(self, block, defect):
        super().__init__(f"block {block} is not Hermitian (defect {defect:.3e})")
        self.block = block
        self.defect = defect


class ParseError(ValidationError):
    def __init__(self, message, line=None, field=None):
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field '{field}'")
        prefix = f"{', '.join(where)}: " if where else ""
        super().__init__(f"{prefix}{message}")
        self.line = line
        self.field = field


class InvalidLead(ValidationError):
    pass


class JointOutsideAxis(ValidationError):
    pass


class InvalidConfig(ValidationError):
    pass


class MomentumOutOfBand(ScatteringError):
    pass


class PoleAtK(ScatteringError):
    pass


class InvalidSite(ScatteringError):
    pass


class InvalidRange(ScatteringError):
    pass


class NotInConservingClass(ScatteringError):
    pass


class ZetaPole(ScatteringError):
    pass


class DegenerateDenominator(ScatteringError):
    pass


class StepTooLarge(ScatteringError):
    pass
