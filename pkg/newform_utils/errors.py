from typing import Any, Optional


class NewformError(ValueError):
    """Base class for every error raised by the newform toolkit."""


class DescriptorSyntaxError(NewformError):
    def __init__(self, message: str, text: str, position: int):
        self.text = text
        self.position = position
        pointer = " " * position + "^"
        super().__init__(f"{message} at position {position}\n  {text}\n  {pointer}")


class DomainError(NewformError):
    pass


class UnsupportedError(NewformError):
    pass


class PoleError(NewformError):
    def __init__(self, message: str, at: Any = None, component: Optional[int] = None):
        self.at = at
        self.component = component
        if component is not None:
            message = f"{message} (component {component})"
        super().__init__(message)


class ConvergenceError(NewformError):
    """Parameters lie outside the region where the integral converges absolutely."""


class QuadratureError(NewformError):
    def __init__(self, message: str, value: Any = None, error: Optional[float] = None):
        self.value = value
        self.error = error
        super().__init__(message)


class BudgetExceeded(NewformError):
    def __init__(self, needed: int, budget: int):
        self.needed = needed
        self.budget = budget
        super().__init__(f"quadrature needs {needed} nodes, budget is {budget}")
