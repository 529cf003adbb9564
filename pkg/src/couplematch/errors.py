"""Exception types shared across the package."""


class CoupleMatchError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(CoupleMatchError):
    """An instance document violates one or more structural rules.

    ``problems`` lists every violated rule, not just the first one.
    """

    def __init__(self, problems):
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


class SearchSpaceExceeded(CoupleMatchError):
    def __init__(self, size, cap):
        self.size = size
        self.cap = cap
        super().__init__(f"search space of {size} assignments exceeds cap {cap}")


class NotResponsive(CoupleMatchError):
    """A couple ranking contradicts responsiveness.

    ``witness`` holds the four pairs involved: two pairs sharing one
    coordinate ordered one way, and two sharing another coordinate ordered
    the other way.
    """

    def __init__(self, member, witness):
        self.member = member
        self.witness = witness
        a, b, c, d = witness
        super().__init__(
            f"not responsive for {member}: {a} above {b} but {d} above {c}"
        )


class InconsistentOrder(CoupleMatchError):
    """Constraints on a poset contain a cycle."""

    def __init__(self, cycle):
        self.cycle = list(cycle)
        super().__init__("cycle: " + " > ".join(map(str, self.cycle)))


class ExtensionCapExceeded(CoupleMatchError):
    """More linear extensions exist than the caller allowed."""

    def __init__(self, count):
        self.count = count
        super().__init__(f"more than {count} linear extensions")


class ConstructionError(CoupleMatchError):
    """A counterexample builder cannot apply to the given instance."""


class InsufficientDoctors(ConstructionError):
    pass
