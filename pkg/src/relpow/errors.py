"""Exception types raised across the package."""


class RelpowError(Exception):
    pass


class DimensionMismatch(RelpowError, ValueError):
    pass


class NotInResolventSet(RelpowError, ArithmeticError):
    """Raised when (lam - A)^{-1} C is not a well-defined single-valued map.

    ``reason`` is ``"range"`` when R(C) is not contained in R(lam - A) and
    ``"kernel"`` when lam - A has a nontrivial kernel.
    """

    def __init__(self, reason, lam=None, detail=""):
        self.reason = reason
        self.lam = lam
        msg = f"{reason} failure at lambda={lam}"
        if detail:
            msg += f": {detail}"
        super().__init__(msg)


class InvalidParams(RelpowError, ValueError):
    pass


class ToleranceNotMet(RelpowError, ArithmeticError):
    def __init__(self, achieved, requested, where=""):
        self.achieved = achieved
        self.requested = requested
        super().__init__(f"{where} achieved error {achieved:.3e} > requested {requested:.3e}")


class RouteDomain(RelpowError, ValueError):
    pass


class OutOfSector(RelpowError, ValueError):
    pass


class TailBoundMissing(RelpowError, ValueError):
    pass


class UnknownIdentity(RelpowError, KeyError):
    pass
