# Core modules
from dataclasses import dataclass, field

# Third party modules
import numpy as np

# Local modules
from .exceptions import (
    DegenerateError,
    EmptyPlanError,
    InvalidParameterError,
    NoBandError
)
from .physics import (
    BiasStack,
    GrapheneModel,
    chemical_potential_from_voltage,
    gate_voltage
)


# Defaults
return_loss_floor = -100.0


def calibrate_quality_factor(
    reference_frequency=1.2e12,
    reference_bandwidth=140e9,
    threshold_db=-10.0,
    source_impedance=1000.0,
    resonance_resistance=None
):
    """
    The resonator Q that gives `reference_bandwidth` of return loss
    below `threshold_db` around `reference_frequency`.
    """

    spread = _band_spread(
        threshold_db,
        source_impedance,
        resonance_resistance or source_impedance
    )

    return spread * reference_frequency / reference_bandwidth


@dataclass(frozen=True)
class MatchingModel:
    Z_S: float = 1000.0
    Q_res: float = None
    R_res: float = None
    reference_frequency: float = 1.2e12
    reference_bandwidth: float = 140e9
    threshold_db: float = -10.0

    def __post_init__(self):
        if not self.Z_S > 0:
            raise InvalidParameterError('must be > 0 ohm', key='Z_S')
        if self.Q_res is not None and not self.Q_res > 0:
            raise InvalidParameterError('must be > 0', key='Q_res')
        if self.R_res is not None and not self.R_res > 0:
            raise InvalidParameterError('must be > 0 ohm', key='R_res')

    @property
    def resistance(self):
        return self.R_res or self.Z_S

    @property
    def quality(self):
        if self.Q_res is not None:
            return self.Q_res

        return calibrate_quality_factor(
            self.reference_frequency,
            self.reference_bandwidth,
            self.threshold_db,
            self.Z_S,
            self.resistance
        )


@dataclass(frozen=True)
class Channel:
    index: int
    f_center: float
    bandwidth: float

    @property
    def lower(self):
        return self.f_center - self.bandwidth / 2

    @property
    def upper(self):
        return self.f_center + self.bandwidth / 2


@dataclass(frozen=True)
class ChannelPlan:
    channels: tuple
    v_range: float
    stack: BiasStack = field(default_factory=BiasStack)
    E_F_per_channel: tuple = ()

    def __len__(self):
        return len(self.channels)

    @property
    def count(self):
        return len(self.channels)

    def rows(self):
        for channel, E_F in zip(self.channels, self.E_F_per_channel):
            yield {
                'index': channel.index,
                'f_center_hz': channel.f_center,
                'bandwidth_hz': channel.bandwidth,
                'e_f_ev': E_F,
                'v_gate_v': gate_voltage(E_F, self.stack),
            }


def input_impedance(f, f_res, m=MatchingModel()):
    """
    Parallel-RLC resonator near resonance:
    Z = R_res / (1 + j·2Q·(f - f_res)/f_res).
    """

    if not f > 0 or not f_res > 0:
        raise InvalidParameterError('frequencies must be > 0 Hz', key='f')

    detuning = 2 * m.quality * (f - f_res) / f_res

    return m.resistance / complex(1, detuning)


def return_loss(Z_in, Z_S=1000.0):
    """
    20·log10|S11| in dB, floored at -100 dB for a perfect match.
    An open or a short reflects fully (0 dB).
    """

    if np.isinf(Z_in):
        return 0.0
    if Z_in + Z_S == 0:
        raise DegenerateError('Z_in = -Z_S leaves S11 undefined')

    reflection = abs((Z_in - Z_S) / (Z_in + Z_S))
    if reflection == 0:
        return return_loss_floor

    return max(return_loss_floor, 20 * np.log10(reflection))


def channel_bandwidth(f_res, m=MatchingModel()):
    """
    Width of the band around f_res where the return loss stays below
    the threshold. Constant as a fraction of f_res for a fixed Q.
    """

    if not f_res > 0:
        raise InvalidParameterError('must be > 0 Hz', key='f_res')

    spread = _band_spread(m.threshold_db, m.Z_S, m.resistance)
    if np.isinf(m.quality):
        return 0.0

    return f_res * spread / m.quality


def plan_channels(
    v_range,
    stack=None,
    L=25e-6,
    material=GrapheneModel(),
    m=MatchingModel(),
    lowest=0.05,
    mode='second',
    allow_empty=True
):
    """
    Greedy low-to-high channel allocation.

    The first band starts at the resonance of the lowest usable
    chemical potential, and every band must fit below the resonance
    reachable with `v_range`. Each following channel starts where the
    previous band ends. Since f grows with E_F and the bandwidth grows
    with f, packing bands edge to edge is optimal.
    """

    if not v_range >= 0:
        raise InvalidParameterError('must be >= 0 V', key='v_range')

    stack = stack or material.stack
    E_max = chemical_potential_from_voltage(v_range, stack, material.constants)
    channels = []
    potentials = []

    if E_max >= lowest:
        f_floor = material.resonance(L, lowest, mode)
        f_top = material.resonance(L, E_max, mode)
        fraction = channel_bandwidth(f_floor, m) / f_floor
        if fraction >= 2:
            raise NoBandError('bands wider than their centre frequency')
        if not fraction > 0:
            raise NoBandError('channels have no usable bandwidth')

        f_center = f_floor / (1 - fraction / 2)
        while f_center * (1 + fraction / 2) <= f_top:
            channels.append(
                Channel(
                    len(channels), f_center, channel_bandwidth(f_center, m)
                )
            )
            potentials.append(material.potential_for(f_center, L, mode))
            f_center *= (1 + fraction / 2) / (1 - fraction / 2)

    if not channels and not allow_empty:
        raise EmptyPlanError(
            'no channel fits within {:g} V'.format(v_range), key='v_range'
        )

    return ChannelPlan(
        channels=tuple(channels),
        v_range=v_range,
        stack=stack,
        E_F_per_channel=tuple(potentials)
    )


def channel_count(v_range, **plan_arguments):
    return plan_channels(v_range, **plan_arguments).count


def channel_opening_voltages(
    count,
    stack=None,
    L=25e-6,
    material=GrapheneModel(),
    m=MatchingModel(),
    lowest=0.05,
    mode='second'
):
    """
    The gate voltage range at which each of the first `count` channels
    becomes available: the edges of the channel-count staircase.
    """

    stack = stack or material.stack
    f_floor = material.resonance(L, lowest, mode)
    fraction = channel_bandwidth(f_floor, m) / f_floor
    ratio = (1 + fraction / 2) / (1 - fraction / 2)
    f_center = f_floor / (1 - fraction / 2)
    voltages = []

    for _ in range(count):
        E_F = material.potential_for(f_center * (1 + fraction / 2), L, mode)
        voltages.append(gate_voltage(E_F, stack, material.constants))
        f_center *= ratio

    return voltages


def channel_count_table(
    v_grid,
    t_grid=(100e-9,),
    eps_grid=(9.3,),
    L=25e-6,
    material=GrapheneModel(),
    m=MatchingModel(),
    lowest=0.05,
    mode='second'
):
    """
    Channel count over a grid of voltage ranges and gate stacks,
    with the resonance reachable at each voltage range.
    """

    rows = []
    for t in t_grid:
        for eps_r in eps_grid:
            stack = BiasStack(t=t, eps_r=eps_r)
            for v_range in v_grid:
                plan = plan_channels(
                    v_range, stack, L, material, m, lowest, mode
                )
                E_max = chemical_potential_from_voltage(
                    v_range, stack, material.constants
                )
                rows.append({
                    'v_range_v': v_range,
                    't_nm': t * 1e9,
                    'eps_r': eps_r,
                    'channel_count': plan.count,
                    'f_res_hz': material.resonance(L, E_max, mode),
                })

    return rows


def _band_spread(threshold_db, source_impedance, resistance):
    """
    The normalised detuning x = 2Q·δf/f at which |S11| reaches the
    threshold; the band is f_res·x/Q wide.
    """

    g2 = 10 ** (threshold_db / 10)
    Z_S = source_impedance
    radicand = (
        g2 * (resistance + Z_S) ** 2 - (resistance - Z_S) ** 2
    ) / (Z_S ** 2 * (1 - g2))

    if not radicand > 0:
        raise NoBandError(
            'return loss never reaches {:g} dB with R_res = {:g} ohm'.format(
                threshold_db, resistance
            )
        )

    return np.sqrt(radicand)
