"""Domain errors.

Every error carries a machine-readable payload so the CLI can report it as
JSON on stderr.
"""


class DomainError(Exception):
    code = "DomainError"

    def __init__(self, message, **payload):
        super().__init__(message)
        self.message = message
        self.payload = payload

    def to_json(self):
        out = {"error": self.code, "message": self.message}
        for k, v in self.payload.items():
            out[k] = _jsonable(v)
        return out


def _jsonable(v):
    from fractions import Fraction
    if isinstance(v, Fraction):
        return f"{v.numerator}/{v.denominator}"
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    return v


def _make(name):
    return type(name, (DomainError,), {"code": name})


StepViolation = _make("StepViolation")
RangeViolation = _make("RangeViolation")
ConcatMismatch = _make("ConcatMismatch")
IncludeOutOfRange = _make("IncludeOutOfRange")
DomainMismatch = _make("DomainMismatch")
DegenerateCodomain = _make("DegenerateCodomain")
InvalidPLMap = _make("InvalidPLMap")
TooLarge = _make("TooLarge")
IndexOutOfRange = _make("IndexOutOfRange")
ModulusMismatch = _make("ModulusMismatch")
DistanceTooLarge = _make("DistanceTooLarge")
PreconditionViolated = _make("PreconditionViolated")
NotCrooked = _make("NotCrooked")
EpsilonTooSmall = _make("EpsilonTooSmall")
NotSurjective = _make("NotSurjective")
CertificateTooWeak = _make("CertificateTooWeak")
GridTooCoarse = _make("GridTooCoarse")
IncoherentData = _make("IncoherentData")
InvalidMove = _make("InvalidMove")
ScheduleExhausted = _make("ScheduleExhausted")
DepthTooLarge = _make("DepthTooLarge")
ParseError = _make("ParseError")
