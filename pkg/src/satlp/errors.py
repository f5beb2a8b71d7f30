"""Exception hierarchy shared by every stage of the pipeline."""


class SatLPError(Exception):
    """Base class for all errors raised by this package."""


# DIMACS / instance errors
class DimacsError(SatLPError, ValueError):
    pass


class MalformedHeader(DimacsError):
    pass


class LiteralOutOfRange(DimacsError):
    pass


class ClauseNotThreeDistinctVars(DimacsError):
    pass


class TruncatedClause(DimacsError):
    pass


class TooManyClauses(SatLPError, ValueError):
    pass


# requirement naming
class RequirementError(SatLPError, ValueError):
    pass


class DuplicateVariable(RequirementError):
    pass


class EmptyRequirement(RequirementError):
    pass


class TooManyLiterals(RequirementError):
    pass


# system construction / solving
class EmptyInstance(SatLPError, ValueError):
    pass


class InfeasibleSystem(SatLPError):
    pass


class UnboundedObjective(SatLPError):
    pass


class IndexOutOfRange(SatLPError, IndexError):
    pass


class TooLarge(SatLPError, ValueError):
    pass


# extraction
class FreeVariable(SatLPError, KeyError):
    pass


class InconsistentPoint(SatLPError, ValueError):
    pass


class ExtractionFailed(SatLPError):
    """Neither sign of a variable reaches the target optimum.

    This is data for the claim audit rather than a programming error, so the
    failing step and both optima are kept on the exception.
    """

    def __init__(self, step, variable, best_values, trace=()):
        self.step = step
        self.variable = variable
        self.best_values = dict(best_values)
        self.trace = list(trace)
        vals = ", ".join(f"{s}: {v}" for s, v in self.best_values.items())
        super().__init__(
            f"extraction failed at step {step} (variable {variable}): "
            f"target {step}, optima {{{vals}}}"
        )


# oracle
class InstanceTooLarge(SatLPError, ValueError):
    pass


class ForwardDirectionViolated(SatLPError):
    """Oracle found a model but the LP came back infeasible.

    A model always induces a feasible 0/1 point, so this always means a bug.
    """
