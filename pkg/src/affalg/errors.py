"""Exception hierarchy shared by every layer of the package."""


class AffalgError(Exception):
    pass


class ParseError(AffalgError):
    """Malformed expression text; ``offset`` is a byte offset into the input."""

    def __init__(self, message, offset=None, text=None):
        self.offset = offset
        self.text = text
        where = f" at byte {offset}" if offset is not None else ""
        super().__init__(f"{message}{where}")


class UnknownIdentifier(ParseError):
    def __init__(self, name, offset=None, text=None):
        self.name = name
        super().__init__(f"unknown identifier {name!r}", offset, text)


class UnknownVariable(AffalgError, KeyError):
    def __init__(self, name):
        self.name = name
        super().__init__(f"unknown variable {name!r}")

    def __str__(self):
        return self.args[0]


class EvaluationError(AffalgError, ArithmeticError):
    """Domain error or non-finite value met while evaluating an expression."""


class AlgebroidError(AffalgError):
    """Structurally invalid algebroid data (bad indices, wrong dependencies, ...)."""


class SingularFrame(AffalgError):
    def __init__(self, point):
        self.point = dict(point)
        super().__init__(f"frame is singular at {self.point}")


class SingularLagrangian(AffalgError):
    def __init__(self, point, det=None):
        self.point = dict(point)
        self.det = det
        super().__init__(f"Hessian of the Lagrangian is singular at {self.point} (det={det})")


class IntegrationAborted(AffalgError):
    """Raised when a trajectory cannot be continued; carries the partial result."""

    def __init__(self, message, node=None, trajectory=None):
        self.node = node
        self.trajectory = trajectory
        super().__init__(message)
