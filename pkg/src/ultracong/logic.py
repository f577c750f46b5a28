from enum import Enum


class TriBool(Enum):
    """Verdict of a finite representation: undetermined means "not decided here"."""

    TRUE = "true"
    FALSE = "false"
    UNDETERMINED = "undetermined"

    @classmethod
    def of(cls, flag):
        return cls.TRUE if flag else cls.FALSE

    @property
    def decisive(self):
        return self is not TriBool.UNDETERMINED

    def __bool__(self):
        raise TypeError("TriBool has no truth value; compare against TriBool members")

    def __str__(self):
        return self.value


def all3(values):
    """Kleene conjunction."""
    values = list(values)
    if any(v is TriBool.FALSE for v in values):
        return TriBool.FALSE
    if any(v is TriBool.UNDETERMINED for v in values):
        return TriBool.UNDETERMINED
    return TriBool.TRUE
