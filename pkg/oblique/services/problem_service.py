from typing import Tuple

from oblique.schemas.problem import EmdenFowlerCoeff, IvpSpec, Nonlinearity


class ProblemService:
    @staticmethod
    def to_nonlinearity(ef: EmdenFowlerCoeff) -> Nonlinearity:
        """f(t, v) = t^(2n-1) A(t) v^(2n-1) with envelope a = t^(2n-1)|A|, g = xi^(2n-1)."""
        p, A, dA = ef.power, ef.A, ef.dA_dt

        def f(t: float, v: float) -> float:
            return t**p * A(t) * v**p

        def df_dv(t: float, v: float) -> float:
            return p * t**p * A(t) * v ** (p - 1)

        df_dt = None
        if dA is not None:

            def df_dt(t: float, v: float) -> float:
                return (p * t ** (p - 1) * A(t) + t**p * dA(t)) * v**p

        def envelope_a(t: float) -> float:
            return t**p * abs(A(t))

        def envelope_g(xi: float) -> float:
            return xi**p

        return Nonlinearity(
            f=f,
            df_dv=df_dv,
            df_dt=df_dt,
            envelope_a=envelope_a,
            envelope_g=envelope_g,
            label=ef.label or f"emden_fowler(n={ef.n})",
        )

    @staticmethod
    def derived_constants(ivp: IvpSpec) -> Tuple[float, float, float]:
        """(u0, v0, c) with u0 = t0 x'(t0) - x(t0), v0 = x(t0)/t0, c = 1 + u0^2/2."""
        return ivp.u0, ivp.v0, ivp.c
