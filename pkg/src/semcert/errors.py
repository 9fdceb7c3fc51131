"""Exception hierarchy.

Every error raised on bad input derives from :class:`InputError`; the CLI maps
those to exit code 2.
"""


class SemcertError(Exception):
    pass


class InputError(SemcertError, ValueError):
    pass


class AsymmetricDistance(InputError):
    pass


class NegativeDistance(InputError):
    pass


class TriangleViolation(InputError):
    def __init__(self, triple, excess):
        i, j, k = triple
        super().__init__(
            f"triangle inequality violated at ({i}, {j}, {k}): "
            f"d(i,k) exceeds d(i,j)+d(j,k) by {excess:.3g}"
        )
        self.triple = triple
        self.excess = excess


class BadBaseIndex(InputError):
    pass


class NonpositiveParameters(InputError):
    pass


class SpaceMismatch(InputError):
    pass


class NonFiniteValue(InputError):
    pass


class NotStochastic(InputError):
    pass


class MarginalMismatch(InputError):
    def __init__(self, what, discrepancy):
        super().__init__(f"{what}: L1 discrepancy {discrepancy:.3g}")
        self.discrepancy = discrepancy


class NotPseudoMetric(InputError):
    pass


class EmptyBall(InputError):
    pass


class EmptySupport(InputError):
    pass


class DistinctMeasuresRequired(InputError):
    pass


class A1NotSatisfied(InputError):
    pass


class GridResolutionTooCoarse(InputError):
    pass


class OutOfDomain(InputError):
    pass


class NonpositiveTime(InputError):
    pass


class SingularSolve(SemcertError):
    pass


class SolverFailure(SemcertError):
    pass
