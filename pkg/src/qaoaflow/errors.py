"""Exception types shared across the package."""


class QAOAFlowError(Exception):
    """Base class for all package-specific errors."""


class InputError(QAOAFlowError, ValueError):
    """Malformed or inconsistent user input."""


class UnsupportedTermError(InputError):
    """Hamiltonian term acting on more than two spins."""


class DomainError(InputError):
    """Parameter value outside its mathematical domain."""


class ConfigError(InputError):
    """Invalid run configuration (file or field level)."""


class SizeLimitError(QAOAFlowError, RuntimeError):
    """Instance exceeds a configured exhaustive or simulation size cap."""


class InternalError(QAOAFlowError, RuntimeError):
    """Broken internal invariant; indicates a bug, not bad input."""


class WorkflowError(QAOAFlowError, RuntimeError):
    """Failure inside a workflow, tagged with the phase it occurred in."""

    def __init__(self, phase, message):
        super().__init__(f"[{phase}] {message}")
        self.phase = phase
