"""Exception taxonomy shared across the package.

The CLI maps these onto exit codes: usage errors exit 2 (argparse),
TransportError exits 3, DomainError and subclasses exit 4.
"""


class DomainError(ValueError):
    """Inputs outside an operation's documented domain."""


class CapacityError(DomainError):
    """Register size outside the supported desk-scale range."""


class DecompositionError(DomainError):
    """Gate decomposition cannot proceed (e.g. not enough scratch qubits)."""


class SimulationError(RuntimeError):
    """Internal consistency failure inside the simulator (bad probabilities)."""


class ProtocolError(RuntimeError):
    """Peer violated the stream protocol (order, framing, unknown tags)."""


class StreamOrderError(ProtocolError):
    """Updates arrived in an order the single-pass contract forbids."""


class FrameError(ProtocolError):
    """A wire frame could not be decoded."""


class TransportError(ConnectionError):
    """Connection-level failure; the affected shot is aborted, not counted."""
