from typing import Callable, Tuple

import numpy as np

from oblique.schemas.problem import Nonlinearity
from oblique.schemas.states import UvState, XState


Rhs = Callable[[float, np.ndarray], np.ndarray]


class TransformService:
    @staticmethod
    def to_uv(s: XState) -> UvState:
        return UvState(t=s.t, u=s.t * s.xp - s.x, v=s.x / s.t)

    @staticmethod
    def from_uv(s: UvState) -> XState:
        x = s.t * s.v
        return XState(t=s.t, x=x, xp=s.v + s.u / s.t)

    @staticmethod
    def uv_rhs(nl: Nonlinearity, s: UvState) -> Tuple[float, float]:
        """u' = -t f(t, v), v' = u / t^2."""
        return -s.t * nl.f(s.t, s.v), s.u / (s.t * s.t)

    @staticmethod
    def uv_system(nl: Nonlinearity) -> Rhs:
        """Array form of uv_rhs for the stepper, y = (u, v)."""
        f = nl.f

        def rhs(t: float, y: np.ndarray) -> np.ndarray:
            u, v = y
            return np.array([-t * f(t, v), u / (t * t)])

        return rhs

    @staticmethod
    def x_system(nl: Nonlinearity) -> Rhs:
        """Direct form x' = xp, xp' = -f(t, x/t), y = (x, xp)."""
        f = nl.f

        def rhs(t: float, y: np.ndarray) -> np.ndarray:
            x, xp = y
            return np.array([xp, -f(t, x / t)])

        return rhs
