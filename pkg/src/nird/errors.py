"""Exception types shared across the package."""


class NirdError(Exception):
    """Base class for every error this package raises on purpose."""


class IsolatedNodeError(NirdError):
    """A node has degree zero; every node needs at least one neighbor."""

    def __init__(self, node: int):
        super().__init__(f"node {node} has degree 0")
        self.node = int(node)


class SelfLoopError(NirdError):
    """An edge connects a node to itself."""

    def __init__(self, node: int):
        super().__init__(f"self-loop at node {node}")
        self.node = int(node)


class OutOfRangeError(NirdError):
    """A node id falls outside [0, n)."""


class BadParamsError(NirdError):
    """Invalid generator or test parameters."""


class BadCaseError(NirdError):
    """Unknown synthetic dependence case."""


class BadBandwidthError(NirdError):
    """Kernel bandwidth must be strictly positive and finite."""


class DimensionMismatchError(NirdError):
    """Operands disagree on sample count or feature dimension."""


class UnknownColumnError(NirdError):
    """An attribute column was referenced that the table does not hold."""

    def __init__(self, name: str):
        super().__init__(f"unknown attribute column {name!r}")
        self.name = name


class PathTooLargeError(NirdError):
    """Exact kernel path refused: n exceeds the dense-matrix guardrail."""


class HypothesisParseError(NirdError):
    """Malformed hypothesis string; ``column`` is the 1-based offset."""

    def __init__(self, message: str, column: int):
        super().__init__(f"{message} (column {column})")
        self.column = column


class ConfigError(NirdError):
    """Malformed or inconsistent benchmark configuration."""
