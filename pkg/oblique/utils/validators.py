import math
from typing import Optional, Tuple


class Validators:
    @staticmethod
    def validate_finite(value: float, name: str = "value") -> float:
        """Validate that a number is neither NaN nor infinite."""
        if not math.isfinite(value):
            raise ValueError(f"{name} must be finite, got {value!r}.")
        return value

    @staticmethod
    def validate_positive(value: float, name: str = "value") -> float:
        Validators.validate_finite(value, name)
        if value <= 0.0:
            raise ValueError(f"{name} must be positive, got {value!r}.")
        return value

    @staticmethod
    def validate_tolerance(value: float, name: str = "tolerance") -> float:
        """Validate a relative tolerance in (0, 1)."""
        Validators.validate_positive(value, name)
        if value >= 1.0:
            raise ValueError(f"{name} must be below 1, got {value!r}.")
        return value

    @staticmethod
    def validate_range(
        value: Optional[Tuple[float, float, int]], name: str = "range"
    ) -> Optional[Tuple[float, float, int]]:
        """Validate a (lo, hi, count) grid axis."""
        if value is None:
            return None
        lo, hi, count = value
        Validators.validate_finite(lo, name)
        Validators.validate_finite(hi, name)
        if hi < lo:
            raise ValueError(f"{name} needs lo <= hi, got {lo!r} > {hi!r}.")
        if count < 1:
            raise ValueError(f"{name} needs at least one point, got {count}.")
        return value
