"""Exception hierarchy.

Two families matter to callers: ``InputError`` covers malformed data and
inconsistent dimensions, ``AnalysisVerdict`` covers well-posed problems whose
answer is negative (infeasible LP, rank-deficient data, ...). The command line
maps them to exit codes 1 and 2.
"""


class TrajcertError(Exception):
    """Base class for every error raised by this package."""


class InputError(TrajcertError, ValueError):
    pass


class AnalysisVerdict(TrajcertError):
    pass


# input / dimension faults
class NonSquare(InputError):
    pass


class NotSymmetric(InputError):
    pass


class LengthMismatch(InputError):
    pass


class DimensionMismatch(InputError):
    pass


class NonPositiveStep(InputError):
    pass


class NonPositiveHorizon(InputError):
    pass


class NormTooLarge(InputError):
    pass


class TooFewSamples(InputError):
    pass


class MalformedHeader(InputError):
    pass


class NonUniformGrid(InputError):
    pass


class NonNumericCell(InputError):
    def __init__(self, row: int, col: int, text: str):
        super().__init__(f"non-numeric cell {text!r} at row {row}, column {col}")
        self.row = row
        self.col = col


class MissingOutputs(InputError):
    pass


class MissingInputs(InputError):
    pass


class QNotPositiveDefinite(InputError):
    pass


class NonzeroInitialState(InputError):
    pass


class NotStable(InputError):
    pass


# verdicts
class NotPositiveDefinite(AnalysisVerdict):
    pass


class Singular(AnalysisVerdict):
    pass


class SingularLyapunovOperator(Singular):
    pass


class RankDeficient(AnalysisVerdict):
    pass


class Infeasible(AnalysisVerdict):
    pass


class Unbounded(AnalysisVerdict):
    pass


class IterationLimit(AnalysisVerdict):
    pass


class ZeroLambda(AnalysisVerdict):
    pass


class NotPositiveDefiniteResult(AnalysisVerdict):
    pass


class TailNotConverged(AnalysisVerdict):
    pass
