from typing import Optional


class IdentificationFailureError(ValueError):
    """
    Raised by the sieve fit when q0(V) is not identified and no ridge was requested
    """

    def __init__(self, min_eigenvalue: float, threshold: float, reason: Optional[str] = None):
        self.min_eigenvalue = float(min_eigenvalue)
        self.threshold = float(threshold)
        self.reason = reason or "Gram matrix is numerically singular"
        super().__init__(
            f"Model is not identified: {self.reason} "
            f"(Gram min eigenvalue {self.min_eigenvalue:.3e}, singularity threshold {self.threshold:.3e})"
        )
