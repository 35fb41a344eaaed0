# Core modules
from dataclasses import dataclass, field, replace
from functools import lru_cache

# Third party modules
import numpy as np
import scipy.constants as const
from scipy.optimize import brentq

# Local modules
from .exceptions import (
    InvalidParameterError,
    NoRootError,
    SingularConductivityError
)


# Defaults
search_band = (0.1e12, 10e12)
conductivity_floor = 1e-12
mode_orders = {'first': 0.5, 'second': 1.0}


@dataclass(frozen=True)
class PhysicalConstants:
    e: float = const.e
    hbar: float = const.hbar
    k_B: float = const.k
    eps0: float = const.epsilon_0
    v_F: float = 1e6
    c: float = const.c

    def __post_init__(self):
        for name in ('e', 'hbar', 'k_B', 'eps0', 'v_F', 'c'):
            if not getattr(self, name) > 0:
                raise InvalidParameterError(
                    'must be strictly positive', key=name
                )


default_constants = PhysicalConstants()


@dataclass(frozen=True)
class GrapheneSheet:
    """
    A graphene sheet: chemical potential E_F in eV, relaxation time tau
    in seconds, temperature T in kelvin and the number of layers N.
    """

    E_F: float = 0.0
    tau: float = 0.5e-12
    T: float = 300.0
    N: int = 1

    def __post_init__(self):
        if not self.E_F >= 0:
            raise InvalidParameterError('must be >= 0 eV', key='E_F')
        if not self.tau > 0:
            raise InvalidParameterError('must be > 0 s', key='tau')
        if not self.T > 0:
            raise InvalidParameterError('must be > 0 K', key='T')
        _check_layers(self.N)

    def at(self, E_F):
        return replace(self, E_F=E_F)


@dataclass(frozen=True)
class BiasStack:
    t: float = 100e-9
    eps_r: float = 9.3

    def __post_init__(self):
        if not self.t > 0:
            raise InvalidParameterError('must be > 0 m', key='t')
        if not self.eps_r > 1:
            raise InvalidParameterError('must be > 1', key='eps_r')


@dataclass(frozen=True)
class SurfaceQuantity:
    """
    A complex sheet quantity at one frequency:
    conductivity in S or impedance in ohms.
    """

    value: complex
    frequency: float


@dataclass(frozen=True)
class CalibrationPoint:
    length: float = 25e-6
    E_F: float = 0.5
    mode: str = 'second'
    frequency: float = 2.3e12


@dataclass(frozen=True)
class GrapheneModel:
    """
    Everything the antenna and planning code needs to turn a chemical
    potential into a conductivity or a resonance: the sheet template,
    the surrounding permittivity, the gate stack and the calibration
    reference of the resonance condition.
    """

    sheet: GrapheneSheet = field(default_factory=GrapheneSheet)
    eps_eff: float = 5.15
    stack: BiasStack = field(default_factory=BiasStack)
    reference: CalibrationPoint = field(default_factory=CalibrationPoint)
    constants: PhysicalConstants = default_constants

    @property
    def calibration(self):
        return _cached_calibration(self)

    def sheet_at(self, E_F):
        return self.sheet.at(E_F)

    def resonance(self, length, E_F, mode='second', conductivity_scale=1.0):
        return resonance_frequency(
            length,
            self.sheet_at(E_F),
            eps_eff=self.eps_eff,
            mode=mode,
            calibration=self.calibration,
            conductivity_scale=conductivity_scale,
            constants=self.constants
        )

    def potential_for(self, frequency, length, mode='second'):
        return chemical_potential_for_resonance(
            frequency,
            length,
            self.sheet,
            eps_eff=self.eps_eff,
            mode=mode,
            calibration=self.calibration,
            constants=self.constants
        )


def thermal_drude_weight(E_F, T, constants=default_constants):
    """
    The intraband weight of the Kubo formula,
    (2e²/πħ)·(k_B T/ħ)·ln[2cosh(E_F/2k_B T)], with E_F in eV.
    """

    c = constants
    x = np.asarray(E_F, dtype=float) * c.e / (2 * c.k_B * T)
    log_cosh = np.logaddexp(x, -x)

    return (2 * c.e ** 2 / (np.pi * c.hbar)) * (c.k_B * T / c.hbar) * log_cosh


def conductivity(sheet, f, constants=default_constants):
    """
    Single-layer conductivity of `sheet` at the frequencies `f`
    (scalar or array). Use `kubo_conductivity` for validated scalars.
    """

    omega = 2 * np.pi * np.asarray(f, dtype=float)
    weight = thermal_drude_weight(sheet.E_F, sheet.T, constants)

    return weight * 1j / (omega + 1j / sheet.tau)


def kubo_conductivity(sheet, f, constants=default_constants):
    _check_frequency(f)

    return SurfaceQuantity(complex(conductivity(sheet, f, constants)), f)


def layer_conductivity(sigma, N):
    _check_layers(N)

    return SurfaceQuantity(N * sigma.value, sigma.frequency)


def surface_impedance(sigma_N):
    if abs(sigma_N.value) < conductivity_floor:
        raise SingularConductivityError(
            '|sigma| = {:g} S is below the {:g} S floor'.format(
                abs(sigma_N.value), conductivity_floor
            )
        )

    return SurfaceQuantity(1 / sigma_N.value, sigma_N.frequency)


def gate_voltage(E_F, stack=BiasStack(), constants=default_constants):
    """
    Single-layer gate voltage needed to reach E_F (eV):
    v = e·E_F²·t / (π ħ² v_F² ε₀ ε_r), with E_F in joules.
    """

    if not np.all(np.asarray(E_F) >= 0):
        raise InvalidParameterError('must be >= 0 eV', key='E_F')

    c = constants
    energy = np.asarray(E_F, dtype=float) * c.e
    voltage = c.e * energy ** 2 * stack.t / (
        np.pi * c.hbar ** 2 * c.v_F ** 2 * c.eps0 * stack.eps_r
    )

    return float(voltage) if np.ndim(voltage) == 0 else voltage


def chemical_potential_from_voltage(
    v, stack=BiasStack(), constants=default_constants
):
    if not np.all(np.asarray(v) >= 0):
        raise InvalidParameterError('must be >= 0 V', key='v')

    c = constants
    energy = np.sqrt(
        np.asarray(v, dtype=float) * np.pi * c.hbar ** 2 * c.v_F ** 2 *
        c.eps0 * stack.eps_r / (c.e * stack.t)
    )
    E_F = energy / c.e

    return float(E_F) if np.ndim(E_F) == 0 else E_F


def effective_permittivity(eps_above=1.0, eps_below=9.3):
    return (eps_above + eps_below) / 2


def plasmon_wavevector(
    sheet, f, eps_eff=5.15, constants=default_constants
):
    """
    Quasi-static TM plasmon wavevector q = 2iωε₀ε_eff/σ_N (rad/m).
    """

    _check_frequency(f)
    if not eps_eff >= 1:
        raise InvalidParameterError('must be >= 1', key='eps_eff')

    sigma_N = layer_conductivity(
        kubo_conductivity(sheet, f, constants), sheet.N
    )
    if abs(sigma_N.value) < conductivity_floor:
        raise SingularConductivityError(
            'conductivity vanishes at E_F = {} eV'.format(sheet.E_F)
        )

    return 2j * (2 * np.pi * f) * constants.eps0 * eps_eff / sigma_N.value


def resonance_calibration(
    sheet=None,
    eps_eff=5.15,
    reference=CalibrationPoint(),
    constants=default_constants
):
    """
    The factor that places the reference dipole (single layer, at the
    reference chemical potential) exactly on the reference frequency.
    """

    reference_sheet = replace(
        sheet or GrapheneSheet(), E_F=reference.E_F, N=1
    )
    q = plasmon_wavevector(
        reference_sheet, reference.frequency, eps_eff, constants
    )

    return q.real * reference.length / (
        2 * np.pi * _mode_order(reference.mode)
    )


@lru_cache(maxsize=64)
def _cached_calibration(model):
    return resonance_calibration(
        model.sheet, model.eps_eff, model.reference, model.constants
    )


def resonance_frequency(
    L,
    sheet,
    eps_eff=5.15,
    mode='second',
    calibration=None,
    conductivity_scale=1.0,
    constants=default_constants,
    band=search_band
):
    """
    Solve Re(q(f))·L = 2π·m·calibration for f inside `band`.

    `conductivity_scale` is the fraction of the sheet's conductivity the
    element carries, used for elements that are only partly tuned out.
    """

    if not L > 0:
        raise InvalidParameterError('must be > 0 m', key='L')
    if not conductivity_scale > 0:
        raise InvalidParameterError(
            'must be > 0', key='conductivity_scale'
        )

    if calibration is None:
        calibration = resonance_calibration(sheet, eps_eff, constants=constants)

    target = 2 * np.pi * _mode_order(mode) * calibration
    weight = (
        sheet.N * conductivity_scale *
        thermal_drude_weight(sheet.E_F, sheet.T, constants)
    )

    low, high = band
    # |sigma| is largest at the low edge of the band
    if abs(weight / (2 * np.pi * low + 1j / sheet.tau)) < conductivity_floor:
        raise NoRootError(
            'no resonance for a sheet without conductivity'
        )

    def condition(f):
        omega = 2 * np.pi * f
        sigma = weight * 1j / (omega + 1j / sheet.tau)
        q = 2j * omega * constants.eps0 * eps_eff / sigma

        return q.real * L - target

    if condition(low) * condition(high) > 0:
        raise NoRootError(
            'resonance is not bracketed in {:g}-{:g} Hz'.format(low, high)
        )

    return brentq(condition, low, high, xtol=1e-6, rtol=1e-15, maxiter=200)


def chemical_potential_for_resonance(
    f,
    L,
    sheet=None,
    eps_eff=5.15,
    mode='second',
    calibration=None,
    constants=default_constants
):
    """
    The chemical potential (eV) that puts the resonance of a dipole of
    length L at f. Inverts the ln(2cosh) thermal weight exactly, so it
    fails below the zero-bias resonance of the sheet.
    """

    _check_frequency(f)
    sheet = sheet or GrapheneSheet()
    c = constants

    if calibration is None:
        calibration = resonance_calibration(sheet, eps_eff, constants=c)

    omega = 2 * np.pi * f
    required = (
        2 * omega ** 2 * c.eps0 * eps_eff * L /
        (2 * np.pi * _mode_order(mode) * calibration * sheet.N)
    )
    y = required / (
        (2 * c.e ** 2 / (np.pi * c.hbar)) * (c.k_B * sheet.T / c.hbar)
    )

    if y < np.log(2):
        raise NoRootError(
            '{:g} Hz is below the zero-bias resonance'.format(f)
        )

    x = y + np.log((1 + np.sqrt(1 - 4 * np.exp(-2 * y))) / 2)

    return float(2 * c.k_B * sheet.T * x / c.e)


def _mode_order(mode):
    try:
        return mode_orders[mode]
    except KeyError:
        raise InvalidParameterError(
            "must be 'first' or 'second', not '{}'".format(mode),
            key='mode'
        )


def _check_frequency(f):
    if not f > 0:
        raise InvalidParameterError('must be > 0 Hz', key='f')


def _check_layers(N):
    if int(N) != N or not 1 <= N < 6:
        raise InvalidParameterError(
            'layer count must be an integer with 1 <= N < 6', key='N'
        )
