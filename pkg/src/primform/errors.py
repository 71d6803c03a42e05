"""Exception hierarchy.

Every fatal condition carries a stage tag, the name of the violated property
and a small witness, so the CLI can report it verbatim.  The exit code of the
CLI is decided by the class: validation gates give 1, failures of the
Calabi-Yau / degeneration hypotheses give 2, truncation problems give 3.
"""


class PrimformError(Exception):
    exit_code = 1

    def __init__(self, message, *, stage=None, anchor=None, witness=None):
        super().__init__(message)
        self.message = message
        self.stage = stage
        self.anchor = anchor
        self.witness = witness

    def to_dict(self):
        return {
            "error": type(self).__name__,
            "message": self.message,
            "stage": self.stage,
            "anchor": self.anchor,
            "witness": self.witness,
        }


# validation gates (exit 1)
class ValidationError(PrimformError):
    exit_code = 1


class ParseError(ValidationError):
    pass


class NotAComplex(ValidationError):
    pass


class NotWellDefined(ValidationError):
    pass


class ProductNotDescending(ValidationError):
    pass


class NotChainMap(ValidationError):
    pass


class CapMismatch(ValidationError):
    pass


class HomogeneityBroken(ValidationError):
    pass


class UniquenessFailure(ValidationError):
    pass


class PCheckFailed(ValidationError):
    pass


class NotIntegrable(ValidationError):
    pass


class RhoSingular(ValidationError):
    pass


class UnsupportedInput(ValidationError):
    pass


# hypothesis failures (exit 2)
class HypothesisFailure(PrimformError):
    exit_code = 2


class NotQuasiIso(HypothesisFailure):
    pass


class Degenerate(HypothesisFailure):
    pass


class NotPerfect(HypothesisFailure):
    pass


class HodgePropertyViolated(HypothesisFailure):
    pass


class DegenerationFails(HypothesisFailure):
    pass


class NotInImage(HypothesisFailure):
    pass


class ObstructionNonExact(HypothesisFailure):
    pass


class RankDrop(HypothesisFailure):
    pass


class LiftNotFound(HypothesisFailure):
    pass


class MissingCYData(HypothesisFailure):
    pass


# truncation problems (exit 3)
class TruncationUnstable(PrimformError):
    exit_code = 3


class StabilizationFailed(TruncationUnstable):
    pass


class WindowTooNarrow(TruncationUnstable):
    pass
