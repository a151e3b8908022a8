"""Exception hierarchy shared by every module of the package."""


class TermModalError(Exception):
    """Base class for all errors raised by termmodal."""


class SignatureError(TermModalError):
    """An identifier is undeclared, misclassified or otherwise ill-formed."""


class UnknownActionModel(TermModalError):
    def __init__(self, name):
        super().__init__(f"unknown action model: {name!r}")
        self.name = name


class UpdateUndefined(TermModalError):
    """A pointed product update was requested where the precondition fails."""


class EmptyUpdate(TermModalError):
    def __init__(self, action=""):
        msg = "update yields empty model"
        if action:
            msg += f" (action {action!r})"
        super().__init__(msg)


class NotEquivalence(TermModalError):
    """An updated indistinguishability relation is not an equivalence."""

    def __init__(self, violations):
        self.violations = list(violations)
        shown = "; ".join(str(v) for v in self.violations[:3])
        more = len(self.violations) - 3
        if more > 0:
            shown += f"; ... ({more} more)"
        super().__init__(f"updated relation is not an equivalence: {shown}")


class ParseError(TermModalError):
    def __init__(self, message, line=1, column=1, source="<formula>"):
        super().__init__(f"{source}:{line}:{column}: {message}")
        self.line = line
        self.column = column


class PivotCollision(TermModalError):
    pass


class ValuationBlowup(TermModalError):
    def __init__(self, n_atoms, cap):
        super().__init__(
            f"valuation blow-up: {n_atoms} grounded formulas give 2^{n_atoms} = "
            f"{2 ** n_atoms} events, above the cap of {cap}"
        )
        self.n_atoms = n_atoms
        self.events = 2 ** n_atoms
        self.cap = cap


class InconsistencyError(TermModalError):
    """Two members of a transformation's formula set hold at the same point."""


class ModelError(TermModalError):
    """A model failed validation; carries the diagnostics."""

    def __init__(self, diagnostics, what="model"):
        self.diagnostics = list(diagnostics)
        super().__init__(f"invalid {what}: " + "; ".join(self.diagnostics))
