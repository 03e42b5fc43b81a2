"""Exception types shared across the package."""


class InstanceError(ValueError):
    """Malformed instance or a scheme applied to items it does not support."""


class UnsupportedDistributionError(InstanceError):
    """An operation needs a finite law but got a continuous or unbounded one."""


class BudgetError(RuntimeError):
    """A configured table, type, combination or gate budget was exceeded."""
