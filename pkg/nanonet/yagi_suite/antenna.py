# Core modules
from dataclasses import dataclass, field

# Third party modules
import numpy as np
from scipy.special import sici

# Local modules
from .exceptions import (
    DegeneratePatternError,
    InvalidConfigError,
    InvalidParameterError,
    NumericalError,
    SingularMatrixError
)
from .physics import (
    GrapheneModel,
    resonance_frequency,
    thermal_drude_weight
)


# Defaults
euler_gamma = np.euler_gamma
directions = ('+X', '-X', '+Y', '-Y')
offset_tolerance = 1e-12
peak_tolerance = 1e-9
residual_band = (1e9, 1e15)


@dataclass(frozen=True)
class Element:
    """
    One graphene dipole. Elements on the Y arm are X-oriented and those
    on the X arm are Y-oriented, so each arm radiates along its own axis.
    """

    index: int
    arm: str
    offset: float
    length: float = 25e-6
    role_hint: str = 'parasitic'

    @property
    def position(self):
        if self.arm == 'Y':
            return np.array([0.0, self.offset, 0.0])
        return np.array([self.offset, 0.0, 0.0])

    @property
    def orientation(self):
        if self.arm == 'Y':
            return np.array([1.0, 0.0, 0.0])
        return np.array([0.0, 1.0, 0.0])


@dataclass(frozen=True)
class AntennaLayout:
    elements: tuple

    def __post_init__(self):
        drivers = [
            element for element in self.elements
            if element.role_hint == 'driver'
        ]
        if [element.index for element in drivers] != [1, 6]:
            raise InvalidConfigError('drivers must be elements 1 and 6')
        if any(abs(element.offset) > offset_tolerance for element in drivers):
            raise InvalidConfigError('drivers must sit at offset 0')
        if drivers[0].arm == drivers[1].arm:
            raise InvalidConfigError('drivers must be mutually orthogonal')

        seen = set()
        for element in self.elements:
            if element.arm not in ('X', 'Y'):
                raise InvalidConfigError(
                    "unknown arm '{}'".format(element.arm)
                )
            slot = (element.arm, round(element.offset / offset_tolerance))
            if slot in seen:
                raise InvalidConfigError(
                    'two elements share arm {} offset {:g} m'.format(
                        element.arm, element.offset
                    )
                )
            seen.add(slot)

    @classmethod
    def default(
        cls,
        length=25e-6,
        reflector_offset=25e-6,
        director_offset=40e-6,
        third_ring=False,
        ring_offset=75e-6
    ):
        """
        Elements 1-5 form the Y arm (driver, +D_r, +D_d, -D_r, -D_d) and
        elements 6-10 the X arm in the same order. The optional third
        ring appends 11-14 at +Y, -Y, +X, -X.
        """

        elements = []
        for arm, first in (('Y', 1), ('X', 6)):
            elements.append(Element(first, arm, 0.0, length, 'driver'))
            offsets = (
                reflector_offset,
                director_offset,
                -reflector_offset,
                -director_offset
            )
            for number, offset in enumerate(offsets, start=first + 1):
                elements.append(Element(number, arm, offset, length))

        if third_ring:
            ring = (
                ('Y', ring_offset),
                ('Y', -ring_offset),
                ('X', ring_offset),
                ('X', -ring_offset)
            )
            for number, (arm, offset) in enumerate(ring, start=11):
                elements.append(Element(number, arm, offset, length))

        return cls(tuple(elements))

    def __len__(self):
        return len(self.elements)

    def find(self, arm, offset):
        for element in self.elements:
            if (
                element.arm == arm and
                abs(element.offset - offset) <= offset_tolerance
            ):
                return element

    def drivers(self):
        return [e for e in self.elements if e.role_hint == 'driver']


@dataclass(frozen=True)
class BeamConfig:
    mode: str = 'omni'
    direction: str = 'any'

    def __post_init__(self):
        if self.mode == 'omni':
            if self.direction != 'any':
                raise InvalidConfigError(
                    "omni mode takes direction 'any'", key='direction'
                )
        elif self.mode == 'directional':
            if self.direction not in directions:
                raise InvalidConfigError(
                    'direction must be one of ' + ', '.join(directions),
                    key='direction'
                )
        else:
            raise InvalidConfigError(
                "must be 'omni' or 'directional'", key='mode'
            )

    @classmethod
    def parse(cls, name):
        if name in ('omni', 'any'):
            return cls()
        return cls('directional', name)

    @property
    def label(self):
        return 'omni' if self.mode == 'omni' else self.direction


all_beams = (BeamConfig(),) + tuple(
    BeamConfig('directional', direction) for direction in directions
)


@dataclass(frozen=True)
class ChannelPotentials:
    """
    Chemical potentials (eV) of one frequency channel and the distances
    at which the reflector and the director sit for that channel.
    """

    driver: float = 0.5
    parasitic: float = 0.8
    reflector_offset: float = 25e-6
    director_offset: float = 40e-6

    def __post_init__(self):
        if not self.driver > 0:
            raise InvalidParameterError('must be > 0 eV', key='driver')
        if not self.parasitic > self.driver:
            raise InvalidParameterError(
                'must exceed the driver potential', key='parasitic'
            )


dual_band_potentials = ChannelPotentials(0.2, 0.5, 40e-6, 75e-6)


@dataclass(frozen=True)
class ElementState:
    potentials: tuple

    def __post_init__(self):
        if any(not E_F >= 0 for E_F in self.potentials):
            raise InvalidParameterError(
                'chemical potentials must be >= 0 eV', key='E_F'
            )

    def __len__(self):
        return len(self.potentials)

    def potential(self, element_index):
        return self.potentials[element_index - 1]


@dataclass(frozen=True)
class AntennaModel:
    """
    Circuit surrogate parameters: strip width for the loss resistance,
    element quality factor for the detuning reactance, the medium in
    which radiation resistance and mutual coupling are evaluated and the
    pattern grid step. Self and mutual terms share one wavenumber so the
    mutual resistance tends to the radiation resistance at zero spacing.
    """

    material: GrapheneModel = field(default_factory=GrapheneModel)
    width: float = 5e-6
    quality: float = 3.0
    coupling: str = 'effective'
    step: float = 1.0
    mode: str = 'second'

    def __post_init__(self):
        if not self.width > 0:
            raise InvalidParameterError('must be > 0 m', key='width')
        if not self.quality > 0:
            raise InvalidParameterError('must be > 0', key='quality')
        if self.coupling not in ('effective', 'free_space'):
            raise InvalidParameterError(
                "must be 'effective' or 'free_space'", key='coupling'
            )
        if not self.step > 0 or (90 / self.step) % 1:
            raise InvalidParameterError(
                'grid step must divide 90 degrees', key='step'
            )

    @property
    def eta(self):
        c = self.material.constants
        return 1 / (c.eps0 * c.c)

    def wavenumber(self, f):
        return 2 * np.pi * f / self.material.constants.c

    def coupling_wavenumber(self, f):
        k0 = self.wavenumber(f)
        if self.coupling == 'effective':
            return k0 * np.sqrt(self.material.eps_eff)
        return k0


@dataclass(frozen=True)
class RadiationPattern:
    theta: np.ndarray
    phi: np.ndarray
    directivity: np.ndarray
    frequency: float
    efficiency: float = 1.0

    @property
    def directivity_dbi(self):
        return 10 * np.log10(np.maximum(self.directivity, 1e-30))

    def xy_cut(self):
        row = np.flatnonzero(np.isclose(self.theta, 90.0))
        if not row.size:
            raise DegeneratePatternError('grid has no theta = 90 row')
        return self.directivity[row[0]]


@dataclass(frozen=True)
class PatternMetrics:
    peak_gain: float
    peak_directivity: float
    beam_direction: tuple
    beamwidth_3db: float
    front_to_back: float
    efficiency: float

    def as_dict(self):
        return {
            'peak_gain_dbi': self.peak_gain,
            'peak_directivity_dbi': self.peak_directivity,
            'beam_theta_deg': self.beam_direction[0],
            'beam_phi_deg': self.beam_direction[1],
            'beamwidth_3db_deg': self.beamwidth_3db,
            'front_to_back_db': self.front_to_back,
            'efficiency': self.efficiency,
        }


def beam_roles(
    config,
    layout,
    reflector_offset=25e-6,
    director_offset=40e-6
):
    """
    Role of every element for a beam: 'driver', 'parasitic' or 'off'.
    """

    roles = ['off'] * len(layout)

    if config.mode == 'omni':
        for driver in layout.drivers():
            roles[driver.index - 1] = 'driver'
        return tuple(roles)

    arm = config.direction[1]
    sign = 1 if config.direction[0] == '+' else -1
    wanted = (
        ('driver', 0.0),
        ('parasitic', sign * director_offset),
        ('parasitic', -sign * reflector_offset),
    )

    for role, offset in wanted:
        element = layout.find(arm, offset)
        if element is None:
            raise InvalidConfigError(
                'no element on the {} arm at {:g} m for beam {}'.format(
                    arm, offset, config.direction
                )
            )
        roles[element.index - 1] = role

    return tuple(roles)


def state_for_beam(config, channel_potentials, layout=None):
    layout = layout or AntennaLayout.default()
    roles = beam_roles(
        config,
        layout,
        channel_potentials.reflector_offset,
        channel_potentials.director_offset
    )
    levels = {
        'driver': channel_potentials.driver,
        'parasitic': channel_potentials.parasitic,
        'off': 0.0,
    }

    return ElementState(tuple(levels[role] for role in roles))


def radiation_resistance(length, k, eta):
    """
    Radiation resistance of a thin dipole with sinusoidal current:
    the zero-spacing limit of the side-by-side mutual resistance.
    """

    x = 2 * k * length
    ci = sici(x)[1]

    return eta / (4 * np.pi) * (euler_gamma + np.log(x) - ci)


def mutual_impedance(spacing, length, k, eta):
    """
    Induced-EMF mutual impedance of two parallel side-by-side dipoles.
    """

    root = np.sqrt(spacing ** 2 + length ** 2)
    u0 = k * spacing
    u1 = k * (root + length)
    u2 = k * (root - length)
    si0, ci0 = sici(u0)
    si1, ci1 = sici(u1)
    si2, ci2 = sici(u2)

    resistance = eta / (4 * np.pi) * (2 * ci0 - ci1 - ci2)
    reactance = -eta / (4 * np.pi) * (2 * si0 - si1 - si2)
    value = complex(resistance, reactance)

    if not np.isfinite(value):
        raise NumericalError(
            'sine/cosine integrals did not converge at spacing {:g} m'.format(
                spacing
            )
        )

    return value


def driven_elements(layout, state):
    return [
        driver.index for driver in layout.drivers()
        if state.potential(driver.index) > 0
    ]


def active_elements(layout, state, rho=0.0):
    """
    Indices taking part in the solve: every biased element, plus the
    tuned-out ones when they keep a residual conductivity.
    """

    _check_rho(rho)
    if len(state) != len(layout):
        raise InvalidParameterError(
            'state has {} potentials for {} elements'.format(
                len(state), len(layout)
            ),
            key='state'
        )

    return [
        element.index for element in layout.elements
        if state.potential(element.index) > 0 or rho > 0
    ]


def element_weights(layout, state, rho=0.0, model=AntennaModel()):
    """
    Drude weight of every active element. Tuned-out elements carry
    rho times the weight of the driven element.
    """

    sheet = model.material.sheet
    constants = model.material.constants
    driven = driven_elements(layout, state)
    if not driven:
        raise InvalidConfigError('no driven element is biased')

    driver_weight = thermal_drude_weight(
        state.potential(driven[0]), sheet.T, constants
    )
    weights = {}
    for index in active_elements(layout, state, rho):
        E_F = state.potential(index)
        if E_F > 0:
            weights[index] = float(
                thermal_drude_weight(E_F, sheet.T, constants)
            )
        else:
            weights[index] = float(rho * driver_weight)

    return weights


def self_impedance(element, weight, f, model=AntennaModel()):
    """
    Radiation plus graphene loss resistance, with a detuning reactance
    that is inductive below the element's own resonance.
    """

    material = model.material
    sheet = material.sheet
    omega = 2 * np.pi * f
    sigma = sheet.N * weight * 1j / (omega + 1j / sheet.tau)

    r_rad = radiation_resistance(
        element.length, model.coupling_wavenumber(f), model.eta
    )
    r_loss = (1 / sigma).real * element.length / model.width
    resonance = _resonance_for_weight(element.length, weight, model)
    reactance = model.quality * r_rad * (resonance / f - f / resonance)

    return complex(r_rad + r_loss, reactance)


def impedance_matrix(layout, state, f, model=AntennaModel(), rho=0.0):
    if not f > 0:
        raise InvalidParameterError('must be > 0 Hz', key='f')

    weights = element_weights(layout, state, rho, model)
    active = active_elements(layout, state, rho)
    elements = {element.index: element for element in layout.elements}
    k = model.coupling_wavenumber(f)

    size = len(active)
    Z = np.zeros((size, size), dtype=complex)
    for row, j in enumerate(active):
        Z[row, row] = self_impedance(elements[j], weights[j], f, model)
        for column in range(row + 1, size):
            other = elements[active[column]]
            if other.arm != elements[j].arm:
                continue
            spacing = abs(other.offset - elements[j].offset)
            Z[row, column] = Z[column, row] = mutual_impedance(
                spacing, elements[j].length, k, model.eta
            )

    return Z


def drive_vector(layout, state, rho=0.0):
    """
    1 V at the driven element. In omni mode the X-arm driver is fed in
    quadrature so the two crossed dipoles fill in each other's nulls.
    """

    active = active_elements(layout, state, rho)
    driven = driven_elements(layout, state)
    V = np.zeros(len(active), dtype=complex)

    for number, index in enumerate(driven):
        V[active.index(index)] = 1j ** number

    return V


def solve_currents(Z, drive):
    Z = np.asarray(Z, dtype=complex)
    drive = np.asarray(drive, dtype=complex)

    if Z.ndim != 2 or Z.shape[0] != Z.shape[1]:
        raise InvalidParameterError('impedance matrix must be square', key='Z')

    try:
        currents = np.linalg.solve(Z, drive)
    except np.linalg.LinAlgError as error:
        raise SingularMatrixError(str(error))

    residual = np.linalg.norm(Z @ currents - drive) / np.linalg.norm(drive)
    if not residual < 1e-10:
        raise SingularMatrixError(
            'solve residual {:g} exceeds 1e-10'.format(residual)
        )

    return currents


def radiation_efficiency(layout, state, f, model=AntennaModel()):
    driven = driven_elements(layout, state)
    if not driven:
        raise InvalidConfigError('no driven element is biased')

    element = layout.elements[driven[0] - 1]
    weight = thermal_drude_weight(
        state.potential(driven[0]), model.material.sheet.T, model.material.constants
    )
    Z = self_impedance(element, float(weight), f, model)
    r_rad = radiation_resistance(
        element.length, model.coupling_wavenumber(f), model.eta
    )

    return r_rad / Z.real


def far_field(layout, state, currents, f, model=AntennaModel(), rho=0.0):
    """
    Total-field directivity of the array. Every active element radiates
    as a short dipole along its orientation, phased by its position.
    """

    active = active_elements(layout, state, rho)
    if len(currents) != len(active):
        raise InvalidParameterError(
            '{} currents for {} active elements'.format(
                len(currents), len(active)
            ),
            key='currents'
        )

    theta = np.arange(int(round(180 / model.step)) + 1) * model.step
    phi = np.arange(int(round(360 / model.step))) * model.step
    t = np.radians(theta)[:, None]
    p = np.radians(phi)[None, :]
    r_hat = np.stack(
        np.broadcast_arrays(np.sin(t) * np.cos(p), np.sin(t) * np.sin(p), np.cos(t))
    )

    k0 = model.wavenumber(f)
    field = np.zeros(r_hat.shape, dtype=complex)
    elements = {element.index: element for element in layout.elements}
    for current, index in zip(currents, active):
        element = elements[index]
        orientation = element.orientation[:, None, None]
        projection = np.tensordot(element.orientation, r_hat, axes=1)
        phase = np.exp(
            1j * k0 * np.tensordot(element.position, r_hat, axes=1)
        )
        field += current * (orientation - projection * r_hat) * phase

    intensity = np.sum(np.abs(field) ** 2, axis=0)
    weights = np.full(theta.size, np.radians(model.step))
    weights[[0, -1]] /= 2
    total = np.sum(
        weights * np.sin(np.radians(theta)) *
        intensity.sum(axis=1) * np.radians(model.step)
    )

    if not total > 0:
        raise DegeneratePatternError('array radiates no power')

    return RadiationPattern(
        theta=theta,
        phi=phi,
        directivity=4 * np.pi * intensity / total,
        frequency=f,
        efficiency=radiation_efficiency(layout, state, f, model)
    )


def pattern_metrics(pattern):
    """
    Headline figures of a pattern, all read on the XY cut: the beam is
    the strongest azimuth there and the peak gain and directivity are
    the values at that azimuth. When several azimuths tie for the peak
    the first one is reported.
    """

    D = pattern.directivity
    if not np.all(np.isfinite(D)) or not D.max() > 0:
        raise DegeneratePatternError('pattern has no finite peak')

    cut = pattern.xy_cut()
    count = cut.size
    if count % 2:
        raise DegeneratePatternError('azimuth grid must contain opposites')

    peak = int(np.flatnonzero(cut >= cut.max() * (1 - peak_tolerance))[0])
    cut_db = 10 * np.log10(np.maximum(cut, 1e-30))
    back = (peak + count // 2) % count
    step = pattern.phi[1] - pattern.phi[0]

    return PatternMetrics(
        peak_gain=float(cut_db[peak] + 10 * np.log10(pattern.efficiency)),
        peak_directivity=float(cut_db[peak]),
        beam_direction=(90.0, float(pattern.phi[peak])),
        beamwidth_3db=_beamwidth(cut_db, peak, step),
        front_to_back=float(cut_db[peak] - cut_db[back]),
        efficiency=float(pattern.efficiency)
    )


def pattern_gain(pattern, azimuth):
    """
    Realised gain (dBi) in the XY plane toward `azimuth` degrees,
    interpolated linearly between grid azimuths.
    """

    cut = pattern.xy_cut() * pattern.efficiency
    cut_db = 10 * np.log10(np.maximum(cut, 1e-30))
    phi = np.append(pattern.phi, 360.0)

    return float(np.interp(azimuth % 360.0, phi, np.append(cut_db, cut_db[0])))


def evaluate_beam(
    layout,
    beam,
    potentials,
    f=None,
    model=AntennaModel(),
    rho=0.0
):
    """
    Run the whole chain for one beam: potentials, impedance solve,
    far field and metrics. Without `f` the antenna is evaluated at the
    resonance of its driven element.
    """

    state = state_for_beam(beam, potentials, layout)
    if f is None:
        f = model.material.resonance(
            layout.elements[0].length, potentials.driver, model.mode
        )

    return evaluate_state(layout, state, f, model, rho)


def evaluate_state(layout, state, f, model=AntennaModel(), rho=0.0):
    Z = impedance_matrix(layout, state, f, model, rho)
    currents = solve_currents(Z, drive_vector(layout, state, rho))
    pattern = far_field(layout, state, currents, f, model, rho)

    return pattern, pattern_metrics(pattern)


def residual_conductivity_sweep(
    layout,
    beam,
    f,
    rho_list,
    potentials=ChannelPotentials(),
    model=AntennaModel()
):
    for rho in rho_list:
        _check_rho(rho)

    return [
        evaluate_beam(layout, beam, potentials, f, model, rho)[1]
        for rho in rho_list
    ]


def _resonance_for_weight(length, weight, model):
    material = model.material
    reference = float(
        thermal_drude_weight(
            material.reference.E_F, material.sheet.T, material.constants
        )
    )

    return resonance_frequency(
        length,
        material.sheet_at(material.reference.E_F),
        eps_eff=material.eps_eff,
        mode=model.mode,
        calibration=material.calibration,
        conductivity_scale=weight / reference,
        constants=material.constants,
        band=residual_band
    )


def _beamwidth(cut_db, peak, step):
    count = cut_db.size
    level = cut_db[peak] - 3.0
    half = count // 2
    widths = []

    for direction in (1, -1):
        width = None
        for offset in range(1, half + 1):
            here = cut_db[(peak + direction * offset) % count]
            if here < level:
                previous = cut_db[(peak + direction * (offset - 1)) % count]
                fraction = (previous - level) / (previous - here)
                width = (offset - 1 + fraction) * step
                break
        if width is None:
            return 360.0
        widths.append(width)

    return float(sum(widths))


def _check_rho(rho):
    if not 0 <= rho < 1:
        raise InvalidParameterError('must lie in [0, 1)', key='rho')
