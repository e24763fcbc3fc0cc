"""Exception hierarchy shared across the package."""


class JointTailsError(Exception):
    """Base class for all package-specific errors."""


class ModelValidationError(JointTailsError, ValueError):
    """A model object (marginal, copula, weight spec) failed validation."""


class RegimeError(JointTailsError, ValueError):
    """An estimator was requested outside its regime of validity."""


class InfiniteMomentError(RegimeError):
    """A weight moment requested for an exponent where it is infinite."""


class ScenarioError(JointTailsError, ValueError):
    """A scenario file is invalid.

    Carries the complete list of violations, each tagged with the field
    location, so a single parse reports every problem at once.
    """

    def __init__(self, violations):
        self.violations = list(violations)
        msg = "invalid scenario (%d problem%s):\n" % (
            len(self.violations),
            "" if len(self.violations) == 1 else "s",
        )
        msg += "\n".join("  - " + v for v in self.violations)
        super().__init__(msg)
