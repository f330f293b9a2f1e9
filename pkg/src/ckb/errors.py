class CKBError(Exception):
    """Base class for all errors raised by ckb."""


class InvalidDiagramError(CKBError, ValueError):
    """Incidence matrix is not a usable diagram (bad entries, zero row or column)."""


class NotPrimitiveError(CKBError, ValueError):
    pass


class NotLinkedError(CKBError, ValueError):
    """A word has consecutive edges e, f with r(e) != s(f)."""


class NotInDomainError(CKBError, ValueError):
    pass


class InvalidMeasureError(CKBError, ValueError):
    pass


class NotSaturatedError(CKBError):
    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class CKDecompositionError(CKBError):
    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class NotAdmissibleError(CKBError, ValueError):
    pass


class InputParseError(CKBError, ValueError):
    """Input file is not valid JSON or lacks a required field."""
