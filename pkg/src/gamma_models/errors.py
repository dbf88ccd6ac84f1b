"""Exception types. Every error carries a stable machine-readable ``code``."""


class GammaModelsError(Exception):
    code = "GAMMA_MODELS_ERROR"


class NonFiniteInput(GammaModelsError, ValueError):
    code = "NON_FINITE_INPUT"


class SampleBudgetExceeded(GammaModelsError, ValueError):
    code = "SAMPLE_BUDGET_EXCEEDED"


class DimensionMismatch(GammaModelsError, ValueError):
    code = "DIMENSION_MISMATCH"


class ArityMismatch(GammaModelsError, ValueError):
    code = "ARITY_MISMATCH"


class NotUnitary(GammaModelsError, ValueError):
    code = "NOT_UNITARY"


class NotAContraction(GammaModelsError, ValueError):
    code = "NOT_A_CONTRACTION"


class TriangularizationFailed(GammaModelsError, RuntimeError):
    code = "TRIANGULARIZATION_FAILED"


class SpectrumOutsideDomain(GammaModelsError, ValueError):
    code = "SPECTRUM_OUTSIDE_DOMAIN"


class NotCommuting(GammaModelsError, ValueError):
    code = "NOT_COMMUTING"


class ResidualTooLarge(GammaModelsError, RuntimeError):
    code = "RESIDUAL_TOO_LARGE"


class CommutativityFailed(GammaModelsError, ValueError):
    code = "COMMUTATIVITY_FAILED"


class NotAnIsometry(GammaModelsError, ValueError):
    code = "NOT_AN_ISOMETRY"


class TruncationHorizonTooSmall(GammaModelsError, ValueError):
    code = "TRUNCATION_HORIZON_TOO_SMALL"


class IterationDivergence(GammaModelsError, RuntimeError):
    code = "ITERATION_DIVERGENCE"


class IllDefinedQuotient(GammaModelsError, ValueError):
    code = "ILL_DEFINED_QUOTIENT"


class TruncationInsufficient(GammaModelsError, ValueError):
    code = "TRUNCATION_INSUFFICIENT"


class EvaluationSingular(GammaModelsError, ArithmeticError):
    code = "EVALUATION_SINGULAR"


class NotCNU(GammaModelsError, ValueError):
    code = "NOT_CNU"


class GridInadequate(GammaModelsError, ValueError):
    code = "GRID_INADEQUATE"


class NotMinimal(GammaModelsError, ValueError):
    code = "NOT_MINIMAL"


class IllConditionedGram(GammaModelsError, ArithmeticError):
    code = "ILL_CONDITIONED_GRAM"


class ConfigError(GammaModelsError, ValueError):
    code = "CONFIG_ERROR"


class RankDeficiencyWarning(UserWarning):
    """Defect space is trivial, so the fundamental system is vacuous."""
