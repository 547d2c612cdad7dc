"""Exception types shared across the package."""


class KernelscopeError(Exception):
    """Base class for all package errors."""


class InvalidMatrix(KernelscopeError):
    """Matrix input violates a precondition (non-finite entries, bad shape)."""


class NotPSD(KernelscopeError):
    """Matrix has an eigenvalue below the PSD tolerance."""

    def __init__(self, eigenvalue: float, tolerance: float):
        self.eigenvalue = float(eigenvalue)
        self.tolerance = float(tolerance)
        super().__init__(
            f"matrix is not PSD: eigenvalue {self.eigenvalue:.6e} "
            f"below -{self.tolerance:.6e}"
        )


class ShapeError(KernelscopeError):
    """Operands have incompatible shapes or register sizes."""


class CapacityExceeded(KernelscopeError):
    """Requested register or subsystem size exceeds the desk-scale cap."""


class NotNormalized(KernelscopeError):
    """Gram matrix is not trace-normalized to N."""


class InvalidKernel(KernelscopeError):
    """Kernel matrix violates a kernel-specific invariant (e.g. Tr <= 0)."""


class FormatError(KernelscopeError):
    """A file does not conform to its declared format."""


class DegenerateDimension(KernelscopeError):
    """A feature dimension has zero variance and cannot be standardized."""


class InsufficientData(KernelscopeError):
    """Fewer data points available than requested."""


class InvalidGenerator(KernelscopeError):
    """Proposed group generator is not a primitive root."""


class InvalidInput(KernelscopeError):
    """Configuration or argument error detected before computation."""
