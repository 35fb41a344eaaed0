# Core modules
import math
import random
from dataclasses import dataclass, field
from functools import lru_cache

# Third party modules
import numpy as np
import simpy
from scipy.optimize import brentq

# Local modules
from .antenna import (
    AntennaLayout,
    AntennaModel,
    BeamConfig,
    ElementState,
    evaluate_state,
    pattern_gain
)
from .controller import (
    AntennaController,
    AntennaState,
    ControllerTiming,
    DacConfig,
    compile_luts,
    usable_plan
)
from .exceptions import InvalidConfigError, NoViableChannelError
from .physics import default_constants
from .rf_planning import plan_channels


# Defaults
absorption_db_per_neper = 10 * math.log10(math.e)
axis_angles = {'+X': 0.0, '+Y': 90.0, '-X': 180.0, '-Y': 270.0}
axis_preference = ('+X', '+Y', '-X', '-Y')
frame_kinds = ('RTS', 'CTS', 'DATA', 'ACK')


@dataclass(frozen=True)
class Node:
    id: int
    position: tuple
    role: str = 'station'
    start: float = 0.0

    def __post_init__(self):
        if self.role not in ('ap', 'station'):
            raise InvalidConfigError(
                "must be 'ap' or 'station'", key='role'
            )
        if len(self.position) != 2:
            raise InvalidConfigError('must be an (x, y) pair', key='position')
        if not self.start >= 0:
            raise InvalidConfigError('must be >= 0 s', key='start')

    def distance_to(self, other):
        return math.hypot(
            other.position[0] - self.position[0],
            other.position[1] - self.position[1]
        )

    def bearing_to(self, other):
        """
        Azimuth in degrees, [0, 360), from this node toward `other`.
        """

        angle = math.degrees(
            math.atan2(
                other.position[1] - self.position[1],
                other.position[0] - self.position[0]
            )
        )

        return angle % 360.0


@dataclass(frozen=True)
class FrameSizes:
    rts: int = 160
    cts: int = 112
    data: int = 12000
    ack: int = 112

    def bits(self, kind):
        return getattr(self, kind.lower())


@dataclass(frozen=True)
class LinkBudget:
    tx_power_dbm: float = 20.0
    noise_dbm: float = -150.0
    snr_threshold_db: float = 10.0


@dataclass(frozen=True)
class SimScenario:
    """
    Everything one MAC run needs. Without a plan, the channels the
    default 4-bit controller can drive at 35 V are used. Without an
    absorption table every channel is absorption free.
    """

    nodes: tuple
    plan: object = None
    control_channel: int = 0
    absorption: tuple = None
    link: LinkBudget = field(default_factory=LinkBudget)
    frames: FrameSizes = field(default_factory=FrameSizes)
    rate: float = 10e9
    seed: int = 0
    duration: float = 1e-4
    packets: int = 1
    max_retries: int = 6
    initial_window: int = 16
    control_phase: bool = True
    channel_selection: str = 'lowest'
    dac: DacConfig = field(default_factory=DacConfig)
    timing: ControllerTiming = field(default_factory=ControllerTiming)
    antenna: AntennaModel = field(default_factory=AntennaModel)
    parasitic_ratio: float = 1.6
    rho: float = 0.0

    def __post_init__(self):
        roles = [node.role for node in self.nodes]
        if roles.count('ap') != 1:
            raise InvalidConfigError(
                'needs exactly one ap, found {}'.format(roles.count('ap')),
                section='scenario', key='nodes'
            )
        if len({node.id for node in self.nodes}) != len(self.nodes):
            raise InvalidConfigError(
                'node ids must be unique', section='scenario', key='nodes'
            )
        if len({tuple(node.position) for node in self.nodes}) != len(self.nodes):
            raise InvalidConfigError(
                'node positions must be distinct',
                section='scenario', key='nodes'
            )
        if self.channel_selection not in ('lowest', 'damc'):
            raise InvalidConfigError(
                "must be 'lowest' or 'damc'",
                section='scenario', key='channel_selection'
            )
        for key in ('rate', 'duration'):
            if not getattr(self, key) > 0:
                raise InvalidConfigError(
                    'must be > 0', section='scenario', key=key
                )
        for key in ('packets', 'initial_window'):
            if int(getattr(self, key)) != getattr(self, key) or getattr(self, key) < 1:
                raise InvalidConfigError(
                    'must be an integer >= 1', section='scenario', key=key
                )
        if self.max_retries < 0:
            raise InvalidConfigError(
                'must be >= 0', section='scenario', key='max_retries'
            )

    @property
    def ap(self):
        return next(node for node in self.nodes if node.role == 'ap')

    @property
    def stations(self):
        return [node for node in self.nodes if node.role == 'station']

    def resolved_plan(self):
        if self.plan is not None:
            return self.plan
        return _default_plan(self.dac, self.parasitic_ratio)

    def airtime(self, kind):
        return self.frames.bits(kind) / self.rate


@dataclass(frozen=True)
class Frame:
    kind: str
    src: int
    dst: int
    channel: int
    seq: int
    bits: int
    airtime: float
    payload: dict = field(default_factory=dict)


@dataclass(frozen=True)
class Delivery:
    frame: Frame
    rx_power: float
    time: float
    states: tuple = ()


@dataclass(frozen=True)
class TraceEvent:
    t: float
    node: int
    kind: str
    channel: int
    detail: dict

    def as_dict(self):
        return {
            't': self.t,
            'node': self.node,
            'kind': self.kind,
            'channel': self.channel,
            'detail': self.detail,
        }


@dataclass(frozen=True)
class LinkMetrics:
    frames_sent: int
    delivered: int
    collisions: int
    deafness: int
    in_flight: int
    handshakes: int
    data_delivered: int
    dropped: int
    mean_handshake_latency: float
    throughput: float
    reconfigurations: int
    reconfiguration_time: float
    reconfigurations_per_node: dict

    @property
    def balanced(self):
        return (
            self.delivered + self.collisions + self.deafness + self.in_flight
            == self.frames_sent
        )

    def as_dict(self):
        return {
            'frames_sent': self.frames_sent,
            'delivered': self.delivered,
            'collisions': self.collisions,
            'deafness_misses': self.deafness,
            'in_flight': self.in_flight,
            'handshakes': self.handshakes,
            'data_delivered': self.data_delivered,
            'dropped': self.dropped,
            'mean_handshake_latency_s': self.mean_handshake_latency,
            'throughput_bps': self.throughput,
            'reconfigurations': self.reconfigurations,
            'reconfiguration_time_s': self.reconfiguration_time,
            'reconfigurations_per_node': {
                str(node): count
                for node, count in sorted(self.reconfigurations_per_node.items())
            },
        }


def cross_topology(count=4, distance=1.0, start=0.0):
    """
    An AP (id 0) at the origin and up to four stations on the axes,
    in the order +X, +Y, -X, -Y.
    """

    if not 1 <= count <= 4:
        raise InvalidConfigError('cross topology holds 1 to 4 stations')

    spots = ((distance, 0.0), (0.0, distance), (-distance, 0.0), (0.0, -distance))

    return (Node(0, (0.0, 0.0), 'ap'),) + tuple(
        Node(number + 1, spots[number], 'station', start)
        for number in range(count)
    )


def nearest_direction(bearing):
    """
    The beam direction whose axis lies closest to `bearing` degrees.
    Ties go to +X, then +Y.
    """

    def separation(direction):
        return round(_angle_between(bearing, axis_angles[direction]), 9)

    return min(axis_preference, key=separation)


def free_space_path_loss(distance, f, constants=default_constants):
    return 20 * math.log10(4 * math.pi * distance * f / constants.c)


def absorption_loss(distance, k):
    return absorption_db_per_neper * k * distance


def path_gain(src, dst, channel, states=None, gains=None, absorption=0.0):
    """
    Link gain in dB from `src` to `dst` on `channel`: antenna gains
    toward each other, less spreading loss and molecular absorption.
    Without `states` both ends are isotropic.
    """

    distance = src.distance_to(dst)
    if not distance > 0:
        raise InvalidConfigError('nodes must not share a position')

    gain_tx = gain_rx = 0.0
    if states is not None:
        gain_tx = gains.gain(states[0], src.bearing_to(dst))
        gain_rx = gains.gain(states[1], dst.bearing_to(src))

    return (
        gain_tx + gain_rx -
        free_space_path_loss(distance, channel.f_center) -
        absorption_loss(distance, absorption)
    )


def estimate_distance(
    received_power,
    tx_power,
    f,
    k=0.0,
    gains=(0.0, 0.0),
    constants=default_constants
):
    """
    Invert the link budget for the distance. Closed form without
    absorption, a bracketed root otherwise.
    """

    loss = tx_power + sum(gains) - received_power
    spreading = constants.c * 10 ** (loss / 20) / (4 * math.pi * f)
    if k == 0:
        return spreading

    def residual(d):
        return free_space_path_loss(d, f, constants) + absorption_loss(d, k) - loss

    return brentq(residual, spreading * 1e-12, spreading, xtol=1e-15, rtol=1e-15)


def damc_select(
    src,
    dst,
    safe_channel,
    plan,
    absorption,
    link=LinkBudget(),
    received_power=None,
    safe_gains=(0.0, 0.0),
    channel_gains=None,
    candidates=None
):
    """
    Distance-aware channel choice: estimate the distance from the power
    received on the safe channel, then pick the channel with the best
    SNR at that distance. Ties go to the lower centre frequency.
    """

    safe = plan.channels[safe_channel]
    if received_power is None:
        received_power = link.tx_power_dbm + sum(safe_gains) + path_gain(
            src, dst, safe, absorption=absorption[safe_channel]
        )

    distance = estimate_distance(
        received_power,
        link.tx_power_dbm,
        safe.f_center,
        absorption[safe_channel],
        safe_gains
    )

    if candidates is None:
        candidates = [c for c in plan.channels if c.index != safe_channel]

    best = None
    for channel in candidates:
        gains = channel_gains(channel) if channel_gains else (0.0, 0.0)
        snr = (
            link.tx_power_dbm + sum(gains) -
            free_space_path_loss(distance, channel.f_center) -
            absorption_loss(distance, absorption[channel.index]) -
            link.noise_dbm
        )
        if snr < link.snr_threshold_db:
            continue
        if (
            best is None or snr > best[0] or
            (snr == best[0] and channel.f_center < best[1].f_center)
        ):
            best = (snr, channel)

    if best is None:
        raise NoViableChannelError(
            'no channel reaches {:g} dB SNR at {:.3g} m'.format(
                link.snr_threshold_db, distance
            )
        )

    return best[1]


class GainModel:
    """
    Realised antenna gain of a node in a given controller state, read
    from the pattern of the potentials the DAC actually reaches.
    """

    def __init__(self, controller_factory, plan, layout, model, rho=0.0):
        self.controller_factory = controller_factory
        self.plan = plan
        self.layout = layout
        self.model = model
        self.rho = rho

    def evaluate(self, state):
        result = self.controller_factory().set(state)

        return _state_pattern(
            self.layout,
            ElementState(result.potentials),
            self.plan.channels[state.channel].f_center,
            self.model,
            self.rho
        )

    def gain(self, state, azimuth):
        return pattern_gain(self.evaluate(state)[0], azimuth)

    def beamwidth(self, state):
        return self.evaluate(state)[1].beamwidth_3db


class Radio:
    def __init__(self, env, node, controller):
        self.node = node
        self.controller = controller
        self.inbox = simpy.Store(env)
        self.arrivals = []
        self.transmissions = []

    @property
    def state(self):
        return self.controller.state


class MacSimulation:
    """
    Discrete-event run of the multichannel handshake: every station
    listens omni on the control channel, asks the AP for a data channel
    with an RTS, and switches to the assigned channel and beam for its
    DATA frame.
    """

    def __init__(self, scenario):
        self.scenario = scenario
        self.plan = scenario.resolved_plan()
        if self.plan.count < 2:
            raise InvalidConfigError(
                'needs a control channel and at least one data channel',
                section='scenario', key='plan'
            )
        if not 0 <= scenario.control_channel < self.plan.count:
            raise InvalidConfigError(
                'not in the channel plan',
                section='scenario', key='control_channel'
            )

        self.absorption = tuple(scenario.absorption or (0.0,) * self.plan.count)
        if len(self.absorption) != self.plan.count:
            raise InvalidConfigError(
                '{} values for {} channels'.format(
                    len(self.absorption), self.plan.count
                ),
                section='scenario', key='absorption'
            )

        self.layout = AntennaLayout.default()
        self.luts = compile_luts(
            self.plan,
            self.layout,
            dac=scenario.dac,
            material=scenario.antenna.material
        )
        self.gains = GainModel(
            self._controller, self.plan, self.layout, scenario.antenna,
            scenario.rho
        )

        self.env = simpy.Environment()
        self.random = random.Random(scenario.seed)
        self.trace = []
        self.sequence = 0
        self.counts = dict.fromkeys(
            ('sent', 'delivered', 'collision', 'deafness', 'handshakes',
             'data_delivered', 'dropped', 'data_bits'),
            0
        )
        self.handshake_latencies = []
        self.booked = {}

        distances = [
            a.distance_to(b)
            for a in scenario.nodes for b in scenario.nodes if a.id < b.id
        ]
        self.propagation_bound = max(distances) / default_constants.c
        self.max_airtime = max(scenario.airtime(kind) for kind in frame_kinds)
        self.timeout = 2 * (self.max_airtime + self.propagation_bound)
        self.slot = scenario.airtime('RTS')

        self.ap = scenario.ap
        self.radios = {}
        for node in scenario.nodes:
            home = self._home_state(node)
            self.radios[node.id] = Radio(
                self.env, node, self._controller(home)
            )

    def run(self):
        for node in self.scenario.nodes:
            radio = self.radios[node.id]
            if node.role == 'ap':
                self.env.process(self._access_point(radio))
            else:
                self.env.process(self._station(radio))

        self.env.run(until=self.scenario.duration)

        return self.trace, self.metrics()

    def metrics(self):
        counts = self.counts
        decided = counts['delivered'] + counts['collision'] + counts['deafness']
        per_node = {
            node_id: radio.controller.reconfigurations
            for node_id, radio in self.radios.items()
        }
        latencies = self.handshake_latencies

        return LinkMetrics(
            frames_sent=counts['sent'],
            delivered=counts['delivered'],
            collisions=counts['collision'],
            deafness=counts['deafness'],
            in_flight=counts['sent'] - decided,
            handshakes=counts['handshakes'],
            data_delivered=counts['data_delivered'],
            dropped=counts['dropped'],
            mean_handshake_latency=(
                float(np.mean(latencies)) if latencies else None
            ),
            throughput=counts['data_bits'] / self.scenario.duration,
            reconfigurations=sum(per_node.values()),
            reconfiguration_time=sum(
                radio.controller.reconfiguration_time
                for radio in self.radios.values()
            ),
            reconfigurations_per_node=per_node
        )

    # Node behaviour
    # ===

    def _station(self, radio):
        scenario = self.scenario
        node = radio.node
        yield self.env.timeout(node.start)

        for _ in range(scenario.packets):
            attempt = 0
            while True:
                if attempt > scenario.max_retries:
                    self.counts['dropped'] += 1
                    self._log(node.id, 'timer', None, {'event': 'drop'})
                    break

                if attempt:
                    window = scenario.initial_window * 2 ** (attempt - 1)
                    slots = self.random.randrange(window)
                    yield self.env.timeout(slots * self.slot)

                started = self.env.now
                yield from self._configure(radio, self._home_state(node))

                rts = self._frame('RTS', node.id, self.ap.id, scenario.control_channel)
                yield from self._transmit(radio, rts)
                cts = yield from self._await(
                    radio,
                    lambda frame: (
                        frame.kind == 'CTS' and
                        frame.payload['request'] == rts.seq
                    ),
                    self.timeout
                )
                if cts is None:
                    self._log(node.id, 'timer', None, {'waiting': 'CTS', 'seq': rts.seq})
                    attempt += 1
                    continue

                data_channel = cts.frame.payload['data_ch']
                beam = BeamConfig('directional', cts.frame.payload['direction'])
                yield from self._configure(radio, AntennaState(data_channel, beam))
                self.counts['handshakes'] += 1
                self.handshake_latencies.append(self.env.now - started)

                data = self._frame('DATA', node.id, self.ap.id, data_channel)
                yield from self._transmit(radio, data)
                ack = yield from self._await(
                    radio,
                    lambda frame: (
                        frame.kind == 'ACK' and
                        frame.payload['request'] == data.seq
                    ),
                    self.timeout
                )
                yield from self._configure(radio, self._home_state(node))

                if ack is not None:
                    self.counts['data_delivered'] += 1
                    self.counts['data_bits'] += data.bits
                    break

                self._log(node.id, 'timer', None, {'waiting': 'ACK', 'seq': data.seq})
                attempt += 1

    def _access_point(self, radio):
        scenario = self.scenario
        sweep = 0

        while True:
            if scenario.control_phase:
                request = yield from self._await(radio, _is_rts, None)
            else:
                direction = axis_preference[sweep % len(axis_preference)]
                sweep += 1
                beam = BeamConfig('directional', direction)
                yield from self._configure(
                    radio, AntennaState(scenario.control_channel, beam)
                )
                request = yield from self._await(radio, _is_rts, self.slot)
                if request is None:
                    continue

            stale = (
                self.env.now - request.time +
                scenario.airtime('CTS') + 2 * self.propagation_bound
            ) > self.timeout
            if stale:
                continue

            yield from self._serve(radio, request)

    def _serve(self, radio, request):
        scenario = self.scenario
        station = self.radios[request.frame.src].node

        channel = self._assign(station, request)
        if channel is None:
            self._log(
                radio.node.id, 'reject', None, {'station': station.id}
            )
            return

        self.booked[channel] = station.id
        self._log(
            radio.node.id, 'assign', channel,
            {'station': station.id, 'data_ch': channel}
        )

        cts = self._frame(
            'CTS', radio.node.id, station.id, scenario.control_channel,
            {
                'data_ch': channel,
                'direction': nearest_direction(station.bearing_to(self.ap)),
                'request': request.frame.seq,
            }
        )
        yield from self._transmit(radio, cts)

        facing = BeamConfig(
            'directional', nearest_direction(self.ap.bearing_to(station))
        )
        yield from self._configure(radio, AntennaState(channel, facing))
        data = yield from self._await(
            radio,
            lambda frame: frame.kind == 'DATA' and frame.src == station.id,
            self.timeout
        )

        if data is not None:
            ack = self._frame(
                'ACK', radio.node.id, station.id, channel,
                {'request': data.frame.seq}
            )
            yield from self._transmit(radio, ack)
        else:
            self._log(radio.node.id, 'timer', channel, {'waiting': 'DATA'})

        del self.booked[channel]
        self._log(
            radio.node.id, 'release', channel,
            {'station': station.id, 'data_ch': channel}
        )
        if scenario.control_phase:
            yield from self._configure(radio, self._home_state(radio.node))

    def _assign(self, station, request):
        scenario = self.scenario
        free = [
            channel for channel in self.plan.channels
            if channel.index != scenario.control_channel and
            channel.index not in self.booked
        ]
        if not free:
            return None

        if scenario.channel_selection == 'lowest':
            return free[0].index

        towards_station = nearest_direction(self.ap.bearing_to(station))
        towards_ap = nearest_direction(station.bearing_to(self.ap))

        def channel_gains(channel):
            return (
                self.gains.gain(
                    AntennaState(channel.index, BeamConfig('directional', towards_ap)),
                    axis_angles[towards_ap]
                ),
                self.gains.gain(
                    AntennaState(
                        channel.index, BeamConfig('directional', towards_station)
                    ),
                    axis_angles[towards_station]
                )
            )

        try:
            return damc_select(
                station,
                self.ap,
                scenario.control_channel,
                self.plan,
                self.absorption,
                scenario.link,
                received_power=request.rx_power,
                safe_gains=self._safe_gains(station, request),
                channel_gains=channel_gains,
                candidates=free
            ).index
        except NoViableChannelError:
            return None

    def _safe_gains(self, station, request):
        """
        Antenna gains the RTS actually saw: the station's state when it
        sent and the AP's state when the frame arrived.
        """

        tx_state, rx_state = request.states

        return (
            self.gains.gain(tx_state, station.bearing_to(self.ap)),
            self.gains.gain(rx_state, self.ap.bearing_to(station))
        )

    # Medium
    # ===

    def _transmit(self, radio, frame):
        start = self.env.now
        end = start + frame.airtime
        tx_state = radio.state

        self.counts['sent'] += 1
        radio.transmissions.append((start, end))
        self._log(
            radio.node.id, 'tx-start', frame.channel, _frame_detail(frame)
        )

        for node_id, receiver in self.radios.items():
            if receiver is radio:
                continue
            if node_id == frame.dst:
                self.env.process(
                    self._arrive(frame, radio, receiver, tx_state)
                )
            else:
                self.env.process(self._overhear(frame, radio, receiver))

        yield self.env.timeout(frame.airtime)
        self._log(radio.node.id, 'tx-end', frame.channel, _frame_detail(frame))

    def _arrive(self, frame, sender, receiver, tx_state):
        delay = sender.node.distance_to(receiver.node) / default_constants.c
        yield self.env.timeout(delay)

        start = self.env.now
        arrival = (start, start + frame.airtime, frame.channel, frame.seq)
        receiver.arrivals.append(arrival)
        snapshot = receiver.state

        yield self.env.timeout(frame.airtime)

        rx_power = self.scenario.link.tx_power_dbm + path_gain(
            sender.node,
            receiver.node,
            self.plan.channels[frame.channel],
            (tx_state, snapshot),
            self.gains,
            self.absorption[frame.channel]
        )
        snr = rx_power - self.scenario.link.noise_dbm
        outcome = self._classify(
            frame, sender, receiver, arrival, snapshot, snr
        )

        self.counts[outcome] += 1
        detail = dict(_frame_detail(frame), outcome=outcome, snr_db=round(snr, 6))
        self._log(receiver.node.id, 'rx-decision', frame.channel, detail)
        self._prune(receiver)

        if outcome == 'delivered':
            receiver.inbox.put(
                Delivery(frame, rx_power, self.env.now, (tx_state, snapshot))
            )

    def _overhear(self, frame, sender, receiver):
        """
        A frame addressed elsewhere still occupies its channel at every
        other radio. It is only registered as interference there.
        """

        delay = sender.node.distance_to(receiver.node) / default_constants.c
        yield self.env.timeout(delay)

        start = self.env.now
        receiver.arrivals.append(
            (start, start + frame.airtime, frame.channel, frame.seq)
        )
        self._prune(receiver)

    def _classify(self, frame, sender, receiver, arrival, snapshot, snr):
        """
        Deafness first (wrong channel, beam pointed away, too weak),
        then any co-channel overlap or own transmission is a collision.
        """

        start, end, channel, seq = arrival
        state = receiver.state

        if snapshot != state or snapshot.channel != channel:
            return 'deafness'
        if snapshot.beam.mode == 'directional':
            offset = _angle_between(
                receiver.node.bearing_to(sender.node),
                axis_angles[snapshot.beam.direction]
            )
            if offset > self.gains.beamwidth(snapshot) / 2:
                return 'deafness'
        if snr < self.scenario.link.snr_threshold_db:
            return 'deafness'

        for other in receiver.arrivals:
            if other[3] != seq and other[2] == channel and other[0] < end and other[1] > start:
                return 'collision'
        for tx_start, tx_end in receiver.transmissions:
            if tx_start < end and tx_end > start:
                return 'collision'

        return 'delivered'

    def _prune(self, radio):
        horizon = self.env.now - self.max_airtime
        radio.arrivals = [a for a in radio.arrivals if a[1] >= horizon]
        radio.transmissions = [t for t in radio.transmissions if t[1] >= horizon]

    # Helpers
    # ===

    def _await(self, radio, accept, timeout):
        """
        Take frames from the inbox until one is accepted, giving up after
        `timeout` seconds (never, for None).
        """

        deadline = None if timeout is None else self.env.now + timeout

        while True:
            get = radio.inbox.get()
            if deadline is None:
                delivery = yield get
            else:
                remaining = deadline - self.env.now
                if remaining <= 0:
                    get.cancel()
                    if not get.triggered:
                        return None
                    delivery = get.value
                else:
                    result = yield get | self.env.timeout(remaining)
                    if get in result:
                        delivery = result[get]
                    elif get.triggered:
                        delivery = get.value
                    else:
                        get.cancel()
                        return None

            if accept(delivery.frame):
                return delivery

    def _configure(self, radio, target):
        previous = radio.state
        result = radio.controller.set(target)

        if target != previous:
            self._log(
                radio.node.id, 'reconfigure', target.channel,
                {'beam': target.beam.label, 'latency': result.latency}
            )

        yield self.env.timeout(result.latency)

    def _home_state(self, node):
        scenario = self.scenario
        if node.role == 'station' and not scenario.control_phase:
            direction = nearest_direction(node.bearing_to(scenario.ap))
            return AntennaState(
                scenario.control_channel, BeamConfig('directional', direction)
            )

        return AntennaState(scenario.control_channel, BeamConfig())

    def _controller(self, initial=None):
        return AntennaController(
            self.luts,
            timing=self.scenario.timing,
            material=self.scenario.antenna.material,
            initial=initial
        )

    def _frame(self, kind, src, dst, channel, payload=None):
        self.sequence += 1
        bits = self.scenario.frames.bits(kind)

        return Frame(
            kind=kind,
            src=src,
            dst=dst,
            channel=channel,
            seq=self.sequence,
            bits=bits,
            airtime=bits / self.scenario.rate,
            payload=payload or {}
        )

    def _log(self, node, kind, channel, detail):
        self.trace.append(TraceEvent(self.env.now, node, kind, channel, detail))


def run_mac(scenario):
    return MacSimulation(scenario).run()


def audit_channel_bookings(trace):
    """
    Replay assign/release events and return the assignments that hit a
    channel still in use.
    """

    booked = {}
    conflicts = []
    for event in trace:
        if event.kind == 'assign':
            if event.channel in booked:
                conflicts.append(event)
            booked[event.channel] = event.detail['station']
        elif event.kind == 'release':
            booked.pop(event.channel, None)

    return conflicts


@lru_cache(maxsize=16)
def _default_plan(dac, ratio):
    return usable_plan(plan_channels(35.0), dac, ratio)


@lru_cache(maxsize=512)
def _state_pattern(layout, state, f, model, rho):
    return evaluate_state(layout, state, f, model, rho)


def _is_rts(frame):
    return frame.kind == 'RTS'


def _frame_detail(frame):
    detail = {'frame': frame.kind, 'seq': frame.seq, 'src': frame.src, 'dst': frame.dst}
    for key, value in sorted(frame.payload.items()):
        detail[key] = value

    return detail


def _angle_between(a, b):
    difference = abs(a - b) % 360.0
    return min(difference, 360.0 - difference)
