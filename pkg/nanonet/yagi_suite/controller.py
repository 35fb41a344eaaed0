# Core modules
import math
from dataclasses import dataclass, field, replace

# Third party modules
import numpy as np

# Local modules
from .antenna import AntennaLayout, BeamConfig, ChannelPotentials, all_beams
from .antenna import beam_roles
from .exceptions import (
    BudgetExceededError,
    InvalidConfigError,
    InvalidParameterError,
    UnknownStateError,
    VoltageOutOfRangeError
)
from .physics import (
    BiasStack,
    GrapheneModel,
    chemical_potential_from_voltage,
    conductivity,
    gate_voltage
)
from .rf_planning import ChannelPlan


# Defaults
role_codes = {'off': 0b00, 'driver': 0b01, 'parasitic': 0b10}
code_roles = {code: role for role, code in role_codes.items()}
field_bits = 8


@dataclass(frozen=True)
class DacConfig:
    """
    A uniform DAC: code n drives n·v_max/(2^bits - 1) volts.
    `bits=None` stands for an ideal, infinite-resolution converter.
    """

    bits: int = 4
    v_max: float = None
    settle_time: float = 1e-9

    def __post_init__(self):
        if self.bits is not None and (int(self.bits) != self.bits or self.bits < 1):
            raise InvalidParameterError('must be an integer >= 1', key='bits')
        if self.v_max is not None and not self.v_max > 0:
            raise InvalidParameterError('must be > 0 V', key='v_max')
        if not self.settle_time >= 0:
            raise InvalidParameterError('must be >= 0 s', key='settle_time')

    @property
    def ideal(self):
        return self.bits is None

    @property
    def top_code(self):
        return 2 ** self.bits - 1

    def code_voltage(self, code):
        if not 0 <= code <= self.top_code:
            raise VoltageOutOfRangeError(
                'code {} outside 0..{}'.format(code, self.top_code)
            )
        return code * self.v_max / self.top_code

    def nearest_code(self, voltage):
        """
        Round half up to the nearest code.
        """

        if voltage > self.v_max * (1 + 1e-12) or voltage < 0:
            raise VoltageOutOfRangeError(
                '{:g} V outside the 0-{:g} V range'.format(voltage, self.v_max)
            )

        return min(
            int(math.floor(voltage * self.top_code / self.v_max + 0.5)),
            self.top_code
        )


@dataclass(frozen=True)
class ControllerTiming:
    lut_read: float = 1e-9
    graphene_response: float = 0.5e-9


@dataclass(frozen=True)
class LutBudget:
    capacity_bytes: int = 2048
    line_bits: int = 32
    max_states: int = 512

    @property
    def line_bytes(self):
        return self.line_bits // 8


@dataclass(frozen=True)
class BiasLevels:
    b_off: int
    b_on1: int
    b_on2: int

    def code(self, role):
        return {
            'off': self.b_off,
            'driver': self.b_on1,
            'parasitic': self.b_on2,
        }[role]

    def pack(self):
        return self.b_off | self.b_on1 << field_bits | self.b_on2 << 2 * field_bits

    @classmethod
    def unpack(cls, line):
        mask = 2 ** field_bits - 1
        return cls(
            line & mask,
            line >> field_bits & mask,
            line >> 2 * field_bits & mask
        )


@dataclass(frozen=True)
class AntennaState:
    channel: int
    beam: BeamConfig = BeamConfig()


@dataclass(frozen=True)
class LutTables:
    bias: tuple
    sel: dict
    element_count: int
    dac: DacConfig
    stack: BiasStack = field(default_factory=BiasStack)

    @property
    def lines(self):
        return len(self.bias) + len(self.sel)


@dataclass(frozen=True)
class ActuationResult:
    state: AntennaState
    voltages: tuple
    potentials: tuple
    latency: float


@dataclass(frozen=True)
class QuantizationReport:
    errors: tuple
    rho: float


def channel_potentials(
    plan,
    ratio=1.6,
    reflector_offset=25e-6,
    director_offset=40e-6
):
    """
    Per-channel potentials: the planned E_F at the driver and `ratio`
    times it at the reflector and director.
    """

    return [
        ChannelPotentials(
            E_F, ratio * E_F, reflector_offset, director_offset
        )
        for E_F in plan.E_F_per_channel
    ]


def restrict_plan(plan, indices):
    channels = tuple(
        replace(plan.channels[index], index=number)
        for number, index in enumerate(indices)
    )

    return ChannelPlan(
        channels=channels,
        v_range=plan.v_range,
        stack=plan.stack,
        E_F_per_channel=tuple(plan.E_F_per_channel[i] for i in indices)
    )


def usable_plan(plan, dac=DacConfig(), ratio=1.6, material=GrapheneModel()):
    """
    The part of `plan` a controller with this DAC can actually drive,
    renumbered from 0.
    """

    potentials = channel_potentials(plan, ratio)
    if not potentials:
        return plan

    return restrict_plan(
        plan, representable_channels(plan, potentials, dac, material)
    )


def full_scale(potentials, stack=BiasStack(), material=GrapheneModel()):
    """
    Gate voltage of the highest parasitic potential, rounded up to 1 V.
    """

    highest = max(p.parasitic for p in potentials)

    return _full_scale_for(highest, stack, material)


def encode_sel_word(roles):
    word = 0
    for position, role in enumerate(roles):
        word |= role_codes[role] << 2 * position

    return word


def decode_sel_word(word, count):
    if word >> 2 * count:
        raise InvalidParameterError(
            'sel word has bits beyond element {}'.format(count), key='sel'
        )

    roles = []
    for position in range(count):
        code = word >> 2 * position & 0b11
        if code not in code_roles:
            raise InvalidParameterError(
                'code 11 at element {} is reserved'.format(position + 1),
                key='sel'
            )
        roles.append(code_roles[code])

    return tuple(roles)


def bias_levels(potentials, dac, stack=BiasStack(), material=GrapheneModel()):
    driver = gate_voltage(potentials.driver, stack, material.constants)
    parasitic = gate_voltage(potentials.parasitic, stack, material.constants)

    if parasitic > dac.v_max * (1 + 1e-12):
        raise VoltageOutOfRangeError(
            '{:.2f} V for {} eV exceeds the {:g} V full scale'.format(
                parasitic, potentials.parasitic, dac.v_max
            )
        )

    levels = BiasLevels(0, dac.nearest_code(driver), dac.nearest_code(parasitic))
    if not levels.b_off < levels.b_on1 < levels.b_on2:
        raise VoltageOutOfRangeError(
            'a {}-bit DAC cannot separate {} eV and {} eV from off'.format(
                dac.bits, potentials.driver, potentials.parasitic
            )
        )

    return levels


def compile_luts(
    plan,
    layout=None,
    potentials=None,
    dac=DacConfig(),
    budget=LutBudget(),
    material=GrapheneModel()
):
    """
    Build the bias and sel tables for every channel of `plan` and every
    beam of the layout, checking them against the LUT budget.
    """

    layout = layout or AntennaLayout.default()
    potentials = potentials or channel_potentials(plan)

    if len(potentials) != plan.count:
        raise InvalidConfigError(
            '{} potential sets for {} channels'.format(
                len(potentials), plan.count
            )
        )
    if not potentials:
        raise InvalidConfigError('plan has no channels')
    if dac.ideal:
        raise InvalidConfigError('LUTs need a finite DAC resolution', key='bits')
    if dac.bits > field_bits:
        raise BudgetExceededError(
            'bias codes are limited to {} bits'.format(field_bits), key='bits'
        )
    if len({(p.reflector_offset, p.director_offset) for p in potentials}) > 1:
        raise InvalidConfigError(
            'all channels must share reflector and director positions'
        )
    if dac.v_max is None:
        dac = replace(dac, v_max=full_scale(potentials, plan.stack, material))

    bias = tuple(
        bias_levels(channel, dac, plan.stack, material)
        for channel in potentials
    )
    sel = {
        beam: encode_sel_word(
            beam_roles(
                beam,
                layout,
                potentials[0].reflector_offset,
                potentials[0].director_offset
            )
        )
        for beam in all_beams
    }
    tables = LutTables(bias, sel, len(layout), dac, plan.stack)

    if 2 * len(layout) > budget.line_bits:
        raise BudgetExceededError(
            '{} elements do not fit a {}-bit line'.format(
                len(layout), budget.line_bits
            )
        )
    if (
        tables.lines > budget.max_states or
        tables.lines * budget.line_bytes > budget.capacity_bytes
    ):
        raise BudgetExceededError(
            '{} lines exceed the {} byte / {} state budget'.format(
                tables.lines, budget.capacity_bytes, budget.max_states
            )
        )

    return tables


def set_state(
    target,
    luts,
    dac=None,
    timing=ControllerTiming(),
    material=GrapheneModel()
):
    """
    Translate a (channel, beam) directive into per-element voltages and
    the chemical potentials they reach.
    """

    dac = dac or luts.dac
    if not 0 <= target.channel < len(luts.bias):
        raise UnknownStateError('no channel {}'.format(target.channel))
    if target.beam not in luts.sel:
        raise UnknownStateError('no beam {}'.format(target.beam.label))

    levels = luts.bias[target.channel]
    roles = decode_sel_word(luts.sel[target.beam], luts.element_count)
    voltages = tuple(dac.code_voltage(levels.code(role)) for role in roles)
    achieved = tuple(
        chemical_potential_from_voltage(v, luts.stack, material.constants)
        for v in voltages
    )

    return ActuationResult(
        state=target,
        voltages=voltages,
        potentials=achieved,
        latency=timing.lut_read + dac.settle_time + timing.graphene_response
    )


class AntennaController:
    """
    The per-node controller: owns the current antenna state and counts
    the reconfigurations it performs.
    """

    def __init__(
        self,
        luts,
        timing=ControllerTiming(),
        material=GrapheneModel(),
        initial=None
    ):
        self.luts = luts
        self.timing = timing
        self.material = material
        self.state = initial
        self.result = None
        self.reconfigurations = 0
        self.reconfiguration_time = 0.0

        if initial is not None:
            self.result = set_state(initial, luts, timing=timing, material=material)

    def set(self, target):
        result = set_state(
            target, self.luts, timing=self.timing, material=self.material
        )

        if target != self.state:
            self.reconfigurations += 1
            self.reconfiguration_time += result.latency

        self.state = target
        self.result = result

        return result


def quantization_report(
    targets,
    dac,
    frequency=2.3e12,
    driver_index=0,
    stack=BiasStack(),
    material=GrapheneModel()
):
    """
    E_F error per element after quantisation, and the residual fraction
    rho = |σ(E_F reached by the off code)| / |σ(driver E_F)|. An automatic
    full scale is the gate voltage of the highest target, rounded up.
    """

    constants = material.constants
    if not dac.ideal and dac.v_max is None:
        dac = replace(
            dac, v_max=_full_scale_for(max(targets), stack, material)
        )

    errors = []
    for target in targets:
        if dac.ideal:
            errors.append(0.0)
            continue
        code = dac.nearest_code(gate_voltage(target, stack, constants))
        reached = chemical_potential_from_voltage(
            dac.code_voltage(code), stack, constants
        )
        errors.append(reached - target)

    off = 0.0 if dac.ideal else chemical_potential_from_voltage(
        dac.code_voltage(0), stack, constants
    )
    sigma_off = conductivity(material.sheet_at(off), frequency, constants)
    sigma_driver = conductivity(
        material.sheet_at(targets[driver_index]), frequency, constants
    )

    return QuantizationReport(
        errors=tuple(errors),
        rho=float(abs(sigma_off) / abs(sigma_driver))
    )


def representable_channels(plan, potentials, dac, material=GrapheneModel()):
    """
    Indices of the channels whose three levels the DAC keeps apart,
    skipping any channel whose driver code repeats an earlier one.
    """

    if dac.v_max is None:
        dac = replace(dac, v_max=full_scale(potentials, plan.stack, material))

    indices = []
    driver_codes = set()
    for index, channel in enumerate(potentials):
        try:
            levels = bias_levels(channel, dac, plan.stack, material)
        except VoltageOutOfRangeError:
            continue
        if levels.b_on1 in driver_codes:
            continue
        driver_codes.add(levels.b_on1)
        indices.append(index)

    return indices


def minimum_dac_bits(plan, potentials, max_bits=field_bits, **arguments):
    """
    The smallest resolution that represents every channel of the plan,
    or None if `max_bits` is not enough.
    """

    for bits in range(1, max_bits + 1):
        dac = DacConfig(bits=bits, **arguments)
        if len(representable_channels(plan, potentials, dac)) == plan.count:
            return bits


def lut_image(luts):
    """
    The binary LUT image: little-endian 32-bit lines, one bias line per
    channel in channel order, then one sel line per beam (omni, +X, -X,
    +Y, -Y).
    """

    lines = [levels.pack() for levels in luts.bias]
    lines += [luts.sel[beam] for beam in all_beams]

    return np.asarray(lines, dtype='<u4').tobytes()


def parse_lut_image(data, element_count, dac=DacConfig(), stack=BiasStack()):
    if len(data) % 4:
        raise InvalidParameterError(
            'image length {} is not a whole number of lines'.format(len(data))
        )

    lines = [int(line) for line in np.frombuffer(data, dtype='<u4')]
    if len(lines) <= len(all_beams):
        raise InvalidParameterError('image holds no bias lines')

    split = len(lines) - len(all_beams)
    sel = dict(zip(all_beams, lines[split:]))
    for word in sel.values():
        decode_sel_word(word, element_count)

    return LutTables(
        bias=tuple(BiasLevels.unpack(line) for line in lines[:split]),
        sel=sel,
        element_count=element_count,
        dac=dac,
        stack=stack
    )


def _full_scale_for(E_F, stack, material):
    return float(math.ceil(gate_voltage(E_F, stack, material.constants)))
