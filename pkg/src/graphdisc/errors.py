"""Exception hierarchy shared by every module."""


class GraphDiscError(Exception):
    """Base class; every library error derives from it."""


class InvalidGraph(GraphDiscError):
    pass


class FixedPointInvolution(InvalidGraph):
    pass


class DanglingReference(InvalidGraph):
    pass


class NonInvolutiveBar(InvalidGraph):
    pass


class InvalidMorphism(GraphDiscError):
    pass


class PartitionMismatch(GraphDiscError):
    pass


class NotConnected(GraphDiscError):
    pass


class ElementBoundExceeded(GraphDiscError):
    pass


class NotTransitive(GraphDiscError):
    pass


class NotASubgroup(GraphDiscError):
    pass


# alias kept for callers using the shorter name
NotSubgroup = NotASubgroup


class NotNormal(GraphDiscError):
    pass


class NotInvariant(GraphDiscError):
    pass


class InvalidAction(GraphDiscError):
    pass


class NotATree(GraphDiscError):
    pass


class OrbitRepsInvalid(GraphDiscError):
    pass


class NotEquivariantFamily(GraphDiscError):
    pass


class ContainmentViolated(GraphDiscError):
    pass


class InvalidGraphOfSpaces(GraphDiscError):
    pass


class NonCommuting(GraphDiscError):
    pass


class NotFree(GraphDiscError):
    pass


class EdgeInversion(GraphDiscError):
    pass


class NoCommonCover(GraphDiscError):
    """Verified negative: the inputs cannot share a finite cover."""


class SearchBoundExceeded(GraphDiscError):
    pass


class AmbiguousLocalSymmetry(GraphDiscError):
    pass


class HatConditionViolated(GraphDiscError):
    def __init__(self, condition, detail=""):
        self.condition = condition
        self.detail = detail
        super().__init__(f"{condition}: {detail}" if detail else condition)


class GluingMismatch(HatConditionViolated):
    def __init__(self, edge, detail=""):
        self.edge = edge
        super().__init__("GluingCondition", f"edge {edge!r}: {detail}")
