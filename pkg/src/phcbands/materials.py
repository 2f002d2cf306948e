"""Frequency-dependent permittivity models in normalized units.

The spectral variable throughout is the normalized frequency
nu = omega * a / (2 pi c) with lattice constant a and vacuum speed c; in the
solver's units (a = c = 1) the physical factor (omega / c)^2 equals
(2 pi nu)^2.  Dispersive models are expressed directly in nu, which makes
them scale-free: physical Drude parameters are converted once via
:func:`normalize_physical_drude`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

SPEED_OF_LIGHT = 2.99792458e8  # m/s

# Default admissibility bounds on |eps|.  Values outside reject a frequency
# for the forms that divide by eps.
DEFAULT_ABS_FLOOR = 1e-8
DEFAULT_ABS_CAP = 1e12


class PermittivityPoleError(ArithmeticError):
    """Permittivity evaluated exactly at a pole of the model."""


@dataclass(frozen=True)
class Constant:
    """Non-dispersive permittivity eps(nu) = eps."""

    eps: complex
    abs_floor: float = DEFAULT_ABS_FLOOR
    abs_cap: float = DEFAULT_ABS_CAP

    def __post_init__(self):
        _check_bound_fields(self.abs_floor, self.abs_cap)
        if not (self.abs_floor <= abs(self.eps) <= self.abs_cap):
            raise ValueError(f"constant permittivity magnitude {abs(self.eps)!r} outside admissible bounds")


@dataclass(frozen=True)
class Drude:
    """Drude metal eps(nu) = 1 - nu_p^2 / (nu^2 - i nu nu_tau).

    nu_p is the normalized plasma frequency and nu_tau the normalized
    collision frequency.  Poles sit at nu = 0 and nu = i nu_tau.
    """

    nu_p: float
    nu_tau: float = 0.0
    abs_floor: float = DEFAULT_ABS_FLOOR
    abs_cap: float = DEFAULT_ABS_CAP

    def __post_init__(self):
        _check_bound_fields(self.abs_floor, self.abs_cap)
        if self.nu_p < 0:
            raise ValueError(f"plasma frequency must be nonnegative, got {self.nu_p!r}")
        if self.nu_tau < 0:
            raise ValueError(f"collision frequency must be nonnegative, got {self.nu_tau!r}")


@dataclass(frozen=True)
class LossyDrude:
    """Damped Drude metal eps(nu) = 1 - nu_p^2 / (nu (nu + i gamma)).

    Poles sit at nu = 0 and nu = -i gamma.
    """

    nu_p: float
    gamma: float = 0.0
    abs_floor: float = DEFAULT_ABS_FLOOR
    abs_cap: float = DEFAULT_ABS_CAP

    def __post_init__(self):
        _check_bound_fields(self.abs_floor, self.abs_cap)
        if self.nu_p < 0:
            raise ValueError(f"plasma frequency must be nonnegative, got {self.nu_p!r}")
        if self.gamma < 0:
            raise ValueError(f"damping rate must be nonnegative, got {self.gamma!r}")


PermittivityModel = Union[Constant, Drude, LossyDrude]


def _check_bound_fields(floor: float, cap: float) -> None:
    if not (0.0 < floor < cap):
        raise ValueError(f"admissibility bounds must satisfy 0 < floor < cap, got {floor!r}, {cap!r}")


def eval_eps(model: PermittivityModel, nu: complex) -> complex:
    """Evaluate the permittivity at normalized frequency ``nu``.

    Raises PermittivityPoleError when ``nu`` lands exactly on a pole of a
    dispersive model (or close enough that the value is not finite).
    """
    nu = complex(nu)
    if isinstance(model, Constant):
        return complex(model.eps)
    if isinstance(model, Drude):
        den = nu * nu - 1j * nu * model.nu_tau
    elif isinstance(model, LossyDrude):
        den = nu * (nu + 1j * model.gamma)
    else:
        raise TypeError(f"unknown permittivity model {model!r}")
    if den == 0:
        raise PermittivityPoleError(f"permittivity pole at nu = {nu!r}")
    value = 1.0 - model.nu_p**2 / den
    if not (math.isfinite(value.real) and math.isfinite(value.imag)):
        raise PermittivityPoleError(f"permittivity overflow near pole at nu = {nu!r}")
    return value


def check_bounds(model: PermittivityModel, nu: complex) -> bool:
    """True when |eps(nu)| lies within the model's admissibility bounds.

    A pole of the model reports False rather than raising.
    """
    try:
        value = eval_eps(model, nu)
    except PermittivityPoleError:
        return False
    return model.abs_floor <= abs(value) <= model.abs_cap


def normalize_physical_drude(omega_p: float, omega_tau: float, a: float) -> Drude:
    """Convert physical Drude parameters to a normalized model.

    Parameters
    ----------
    omega_p, omega_tau : float
        Plasma and collision angular frequencies in rad/s.
    a : float
        Lattice constant in metres, a > 0.

    Returns
    -------
    Drude with nu_p = omega_p a / (2 pi c) and nu_tau = omega_tau a / (2 pi c).
    """
    if a <= 0:
        raise ValueError(f"lattice constant must be positive, got {a!r}")
    if omega_p < 0 or omega_tau < 0:
        raise ValueError("Drude frequencies must be nonnegative")
    scale = a / (2.0 * math.pi * SPEED_OF_LIGHT)
    return Drude(nu_p=omega_p * scale, nu_tau=omega_tau * scale)
