"""Exception taxonomy shared by every module.

ValueError subclasses signal violated call contracts (bad arguments, wrong
solver branch); RuntimeError subclasses signal that a well-posed request has
no answer (no admissible T2, no wavelength in band, infeasible round).
"""


class DomainError(ValueError):
    """An argument lies outside the documented domain of an operation."""


class NoSolutionError(DomainError):
    """A coupler inversion target exceeds the model range f^2 (or is negative).

    Distinct from an empty result list, which means the band simply contains
    no crossing.
    """


class BranchError(ValueError):
    """The same-sign closed form does not apply to these heterodyne outcomes.

    Raised by :func:`wlattack.solver.solve_same_sign`; callers should fall
    back to :func:`wlattack.solver.solve_general`.
    """


class InfeasibleError(RuntimeError):
    """No admissible operating point exists in the scanned interval."""

    def __init__(self, message: str, scanned_interval=None):
        super().__init__(message)
        self.scanned_interval = scanned_interval


class UnrealizableError(RuntimeError):
    """No wavelength in the search band realizes a required transmittance."""

    def __init__(self, message: str, unrealized=()):
        super().__init__(message)
        self.unrealized = tuple(unrealized)


class ContractViolationError(ValueError):
    """A forged-beam solution handed to the detector chain fails its residual bound."""


class SessionInfeasibleError(RuntimeError):
    """A per-round solve failed inside a session; carries the failing round index."""

    def __init__(self, round_index: int, message: str):
        super().__init__(f"round {round_index}: {message}")
        self.round_index = round_index


class InsufficientDataError(ValueError):
    """Parameter estimation was asked to run on fewer rounds than it supports."""


class ConfigError(ValueError):
    """A run configuration is malformed; carries the offending key when known."""

    def __init__(self, message: str, key=None):
        super().__init__(message)
        self.key = key
