"""Closed-form coefficient functions used by problem definitions.

All callables accept numpy scalars or arrays and broadcast over them.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Constant:
    """Function of any number of arguments returning ``value`` broadcast to the first one."""

    value: float

    def __call__(self, *args):
        if not args:
            return float(self.value)
        sample = np.asarray(args[0], dtype=np.float64)
        if sample.ndim == 0:
            return float(self.value)
        return np.full(sample.shape, float(self.value))


@dataclass(frozen=True)
class SineProfile:
    """``offset + amplitude * sin(wavenumber * pi * x / length)`` on ``[0, length]``."""

    offset: float
    amplitude: float = 0.0
    wavenumber: float = 1.0
    length: float = 1.0

    def __call__(self, x):
        x = np.asarray(x, dtype=np.float64)
        values = self.offset + self.amplitude * np.sin(self.wavenumber * np.pi * x / self.length)
        return float(values) if values.ndim == 0 else values


@dataclass(frozen=True)
class Mobility:
    """Tagged mobility ``f`` with its analytic derivative.

    Works on numpy arrays and torch tensors alike (only arithmetic is used).
    """

    name: str = "quadratic"

    def __post_init__(self) -> None:
        if self.name not in MOBILITIES:
            raise ValueError(f"problem.mobility: unknown mobility '{self.name}'")

    def value(self, rho):
        if self.name == "zero":
            return rho * 0.0
        return rho * (1.0 - rho)

    def derivative(self, rho):
        if self.name == "zero":
            return rho * 0.0
        return 1.0 - 2.0 * rho

    @property
    def preserves_bounds(self) -> bool:
        return self.name == "quadratic"


MOBILITIES = ("quadratic", "zero")


@dataclass(frozen=True)
class PotentialGradient:
    """Edge potential gradient ``d_e(t, x)`` and its spatial derivative."""

    value: object = Constant(1.0)
    dx: object = Constant(0.0)

    @classmethod
    def constant(cls, value: float) -> "PotentialGradient":
        return cls(value=Constant(float(value)), dx=Constant(0.0))

    def __call__(self, t, x):
        return self.value(t, x)

    def derivative(self, t, x):
        return self.dx(t, x)


__all__ = ["Constant", "MOBILITIES", "Mobility", "PotentialGradient", "SineProfile"]
