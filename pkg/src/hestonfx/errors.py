"""Exception taxonomy shared by every module.

Each concrete class carries a stable ``name`` used by the command-line
front end when reporting failures.
"""


class HestonError(Exception):
    name = "HestonError"

    def to_dict(self):
        return {"error": self.name, "message": str(self)}


class InvalidParameters(HestonError, ValueError):
    """One or more model/market/contract invariants are violated.

    ``violations`` lists every failed invariant by name, not only the first.
    """

    name = "InvalidParameters"

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__(", ".join(f"{n}: {msg}" for n, msg in self.violations))

    def to_dict(self):
        out = super().to_dict()
        out["violations"] = [n for n, _ in self.violations]
        return out


class QuadratureNotConverged(HestonError, ArithmeticError):
    name = "QuadratureNotConverged"


class MomentConditionViolated(HestonError, ArithmeticError):
    name = "MomentConditionViolated"


class StrikeOutOfRange(HestonError, ValueError):
    name = "StrikeOutOfRange"


class HorizonMismatch(HestonError, ValueError):
    name = "HorizonMismatch"


class NegativeForwardVariance(HestonError, ArithmeticError):
    name = "NegativeForwardVariance"


class DeltaOutOfRange(HestonError, ValueError):
    name = "DeltaOutOfRange"


class PriceOutOfBand(HestonError, ValueError):
    name = "PriceOutOfBand"


class BracketExhausted(HestonError, ArithmeticError):
    name = "BracketExhausted"


class DegenerateSlice(HestonError, ValueError):
    name = "DegenerateSlice"


class NoConvergence(HestonError, ArithmeticError):
    name = "NoConvergence"


ALL_ERRORS = (
    InvalidParameters,
    QuadratureNotConverged,
    MomentConditionViolated,
    StrikeOutOfRange,
    HorizonMismatch,
    NegativeForwardVariance,
    DeltaOutOfRange,
    PriceOutOfBand,
    BracketExhausted,
    DegenerateSlice,
    NoConvergence,
)
