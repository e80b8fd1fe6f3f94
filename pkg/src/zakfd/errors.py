"""Exception types shared across the package."""


class ConfigurationError(ValueError):
    """Inconsistent or out-of-range run parameters."""


class SolverFailure(RuntimeError):
    """A linear or nonlinear solve could not produce a usable answer."""


class StepFailure(SolverFailure):
    """The coupled fixed-point iteration of one time step did not converge."""

    def __init__(self, k, residual, t=None, message=None):
        self.k = k
        self.residual = residual
        self.t = t
        at = f"step {k}" if t is None else f"step {k} (t = {t:.6g})"
        super().__init__(
            message or f"fixed-point iteration did not converge at {at}, "
            f"last residual {residual:.3e}"
        )


class BlowUp(SolverFailure):
    """Non-finite values appeared in the numerical solution."""

    def __init__(self, k, t):
        self.k = k
        self.t = t
        super().__init__(f"non-finite solution at step {k} (t = {t:.6g})")
