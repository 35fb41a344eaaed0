# Core modules
import math
import random

# Third party modules
import scipy.constants as const
from pytest import approx, raises

# Local modules
from nanonet.yagi_suite.antenna import BeamConfig
from nanonet.yagi_suite.controller import AntennaState
from nanonet.yagi_suite.exceptions import (
    InvalidConfigError,
    NoViableChannelError
)
from nanonet.yagi_suite.netsim import (
    LinkBudget,
    MacSimulation,
    Node,
    SimScenario,
    TraceEvent,
    absorption_loss,
    audit_channel_bookings,
    cross_topology,
    damc_select,
    estimate_distance,
    free_space_path_loss,
    nearest_direction,
    path_gain,
    run_mac
)
from nanonet.yagi_suite.rf_planning import Channel, ChannelPlan, plan_channels


reference_plan = ChannelPlan(
    channels=(Channel(0, 2.0e12, 230e9), Channel(1, 2.3e12, 268e9)),
    v_range=92,
    E_F_per_channel=(0.5, 0.5)
)


def _scenario(nodes, **arguments):
    return SimScenario(nodes=nodes, plan=reference_plan, **arguments)


def _directional(direction):
    return BeamConfig('directional', direction)


def test_cross_topology():
    nodes = cross_topology(4, distance=2.0)

    assert [node.id for node in nodes] == [0, 1, 2, 3, 4]
    assert nodes[0].role == 'ap'
    assert nodes[2].position == (0.0, 2.0)
    assert nodes[0].bearing_to(nodes[3]) == approx(180)
    assert nodes[4].bearing_to(nodes[0]) == approx(90)
    assert nodes[0].distance_to(nodes[1]) == 2

    with raises(InvalidConfigError):
        cross_topology(5)


def test_nearest_direction():
    assert nearest_direction(10) == '+X'
    assert nearest_direction(350) == '+X'
    assert nearest_direction(100) == '+Y'
    assert nearest_direction(200) == '-X'
    assert nearest_direction(45) == '+X'
    assert nearest_direction(135) == '+Y'
    assert nearest_direction(225) == '-X'
    assert nearest_direction(315) == '+X'


def test_invalid_scenarios():
    ap = Node(0, (0.0, 0.0), 'ap')

    with raises(InvalidConfigError):
        SimScenario(nodes=(ap, Node(1, (1.0, 0.0), 'ap')))

    with raises(InvalidConfigError):
        SimScenario(nodes=(ap, Node(0, (1.0, 0.0))))

    with raises(InvalidConfigError):
        SimScenario(nodes=(ap, Node(1, (0.0, 0.0))))

    with raises(InvalidConfigError):
        SimScenario(nodes=(ap,), channel_selection='random')

    with raises(InvalidConfigError):
        Node(1, (1.0, 0.0), 'relay')

    with raises(InvalidConfigError):
        MacSimulation(_scenario(cross_topology(1), control_channel=2))

    with raises(InvalidConfigError):
        MacSimulation(_scenario(cross_topology(1), absorption=(0.0,)))


def test_spreading_loss_doubles_per_octave_of_distance():
    ap = Node(0, (0.0, 0.0), 'ap')
    near = Node(1, (1.0, 0.0))
    far = Node(2, (2.0, 0.0))
    channel = reference_plan.channels[1]

    drop = path_gain(ap, near, channel) - path_gain(ap, far, channel)

    assert drop == approx(20 * math.log10(2), abs=1e-9)
    assert path_gain(ap, near, channel) == approx(
        -20 * math.log10(4 * math.pi * 2.3e12 / const.c)
    )


def test_absorption():
    ap = Node(0, (0.0, 0.0), 'ap')
    station = Node(1, (10.0, 0.0))
    channel = reference_plan.channels[0]

    assert absorption_loss(10, 0.23) == approx(9.9888, abs=1e-4)
    assert path_gain(ap, station, channel) - path_gain(
        ap, station, channel, absorption=0.23
    ) == approx(absorption_loss(10, 0.23))


def test_receiver_facing_away_loses_the_front_to_back_ratio():
    simulation = MacSimulation(_scenario(cross_topology(1)))
    ap, station = simulation.scenario.ap, simulation.scenario.stations[0]
    channel = reference_plan.channels[1]
    tx = AntennaState(1, _directional('-X'))
    facing = AntennaState(1, _directional('+X'))
    away = AntennaState(1, _directional('-X'))

    towards = path_gain(station, ap, channel, (tx, facing), simulation.gains)
    rotated = path_gain(station, ap, channel, (tx, away), simulation.gains)
    metrics = simulation.gains.evaluate(facing)[1]

    assert metrics.beam_direction == (90.0, 0.0)
    assert towards - rotated == approx(metrics.front_to_back, abs=1e-6)
    assert towards > rotated


def test_distance_estimate_is_exact():
    ap = Node(0, (0.0, 0.0), 'ap')
    channel = reference_plan.channels[0]

    for distance in (0.1, 1.0, 7.5):
        station = Node(1, (distance, 0.0))
        for k in (0.0, 0.5):
            received = 20 + path_gain(station, ap, channel, absorption=k)

            assert estimate_distance(
                received, 20, channel.f_center, k
            ) == approx(distance, rel=1e-9)


def test_damc_avoids_absorbed_channel_beyond_its_reach():
    plan = plan_channels(35)
    link = LinkBudget()
    absorbed = 3
    absorption = [0.0] * plan.count
    absorption[absorbed] = 2.0
    ap = Node(0, (0.0, 0.0), 'ap')

    def channel_gains(channel):
        return (15.0, 0.0) if channel.index == absorbed else (0.0, 0.0)

    def snr(channel, distance):
        return (
            link.tx_power_dbm + sum(channel_gains(channel)) -
            free_space_path_loss(distance, channel.f_center) -
            absorption_loss(distance, absorption[channel.index]) -
            link.noise_dbm
        )

    picks = []
    for distance in (0.1, 0.3, 0.5, 1, 2, 5, 10, 20, 30):
        station = Node(1, (distance, 0.0))
        chosen = damc_select(
            station, ap, 0, plan, absorption, link,
            channel_gains=channel_gains
        )
        picks.append(chosen.index)
        best = max(
            snr(channel, distance) for channel in plan.channels[1:]
        )

        assert snr(chosen, distance) == approx(best)
        if chosen.index == absorbed:
            assert snr(chosen, distance) >= link.snr_threshold_db

    assert picks[0] == absorbed
    assert absorbed not in picks[-3:]


def test_damc_prefers_lowest_frequency_without_absorption():
    plan = plan_channels(35)
    ap = Node(0, (0.0, 0.0), 'ap')
    station = Node(1, (1.0, 0.0))

    chosen = damc_select(station, ap, 0, plan, [0.0] * plan.count)

    assert chosen.index == 1


def test_damc_without_viable_channel():
    plan = plan_channels(35)
    ap = Node(0, (0.0, 0.0), 'ap')
    station = Node(1, (1e4, 0.0))

    with raises(NoViableChannelError):
        damc_select(station, ap, 0, plan, [0.0] * plan.count)


def test_single_station_handshake():
    trace, metrics = run_mac(_scenario(cross_topology(1)))
    propagation = 1.0 / const.c
    expected = 2 * 2.5e-9 + (160 + 112) / 10e9 + 2 * propagation

    assert metrics.mean_handshake_latency == approx(expected, abs=1e-12)
    assert metrics.handshakes == 1
    assert metrics.data_delivered == 1
    assert metrics.frames_sent == 4
    assert metrics.delivered == 4
    assert metrics.collisions == metrics.deafness == metrics.in_flight == 0
    assert metrics.reconfigurations_per_node[1] == 2
    assert metrics.reconfigurations_per_node[0] == 2
    assert metrics.throughput == approx(12000 / 1e-4)
    assert metrics.balanced

    kinds = [event.kind for event in trace]
    assert kinds.count('assign') == kinds.count('release') == 1


def test_traces_are_deterministic():
    scenario = _scenario(cross_topology(4), seed=7)

    first_trace, first_metrics = run_mac(scenario)
    second_trace, second_metrics = run_mac(scenario)

    assert [event.as_dict() for event in first_trace] == [
        event.as_dict() for event in second_trace
    ]
    assert first_metrics == second_metrics


def test_trace_events_are_time_ordered():
    trace, _ = run_mac(_scenario(cross_topology(4), seed=3))

    times = [event.t for event in trace]

    assert times == sorted(times)
    assert isinstance(trace[0], TraceEvent)
    assert set(trace[0].as_dict()) == {'t', 'node', 'kind', 'channel', 'detail'}


def test_frame_accounting_balances():
    generator = random.Random(11)

    for _ in range(20):
        nodes = cross_topology(
            generator.randint(1, 4),
            distance=generator.uniform(0.5, 2.0),
            start=generator.uniform(0, 1e-8)
        )
        scenario = _scenario(
            nodes,
            seed=generator.randrange(1000),
            duration=generator.uniform(2e-8, 2e-5),
            control_phase=generator.random() < 0.7
        )

        _, metrics = run_mac(scenario)

        assert metrics.balanced
        assert metrics.in_flight >= 0


def test_simultaneous_requests_collide():
    _, metrics = run_mac(_scenario(cross_topology(2)))

    assert metrics.collisions >= 2
    assert metrics.data_delivered >= 1
    assert metrics.balanced


def test_data_channels_are_never_double_booked():
    for seed in range(3):
        trace, _ = run_mac(_scenario(cross_topology(4), seed=seed))

        assert audit_channel_bookings(trace) == []


def test_booking_audit_reports_conflicts():
    detail = {'station': 1}
    trace = [
        TraceEvent(0.0, 0, 'assign', 1, detail),
        TraceEvent(1.0, 0, 'assign', 1, {'station': 2}),
        TraceEvent(2.0, 0, 'release', 1, detail),
        TraceEvent(3.0, 0, 'assign', 1, detail),
    ]

    assert audit_channel_bookings(trace) == [trace[1]]


def test_directional_requests_suffer_more_deafness():
    control = directional = 0

    for seed in range(10):
        nodes = cross_topology(4)
        control += run_mac(_scenario(nodes, seed=seed))[1].deafness
        directional += run_mac(
            _scenario(nodes, seed=seed, control_phase=False)
        )[1].deafness

    assert directional > control


def test_beam_pointed_away_is_deaf():
    for direction, outcome in (('+Y', 'deafness'), ('+X', 'delivered')):
        simulation = MacSimulation(_scenario(cross_topology(1)))
        ap, station = simulation.radios[0], simulation.radios[1]
        ap.controller.set(AntennaState(1, _directional(direction)))
        station.controller.set(AntennaState(1, _directional('-X')))

        frame = simulation._frame('RTS', 1, 0, 1)
        simulation.env.process(simulation._transmit(station, frame))
        simulation.env.run()

        assert simulation.counts[outcome] == 1


def test_wrong_channel_is_deaf():
    simulation = MacSimulation(_scenario(cross_topology(1)))
    station = simulation.radios[1]

    frame = simulation._frame('RTS', 1, 0, 1)
    simulation.env.process(simulation._transmit(station, frame))
    simulation.env.run()

    assert simulation.counts['deafness'] == 1


def test_damc_channel_selection_in_simulation():
    _, metrics = run_mac(
        _scenario(cross_topology(1), channel_selection='damc')
    )

    assert metrics.data_delivered == 1
    assert metrics.balanced


def test_metrics_dictionary():
    _, metrics = run_mac(_scenario(cross_topology(1)))

    summary = metrics.as_dict()

    assert summary['deafness_misses'] == 0
    assert summary['reconfigurations_per_node'] == {'0': 2, '1': 2}
    assert summary['mean_handshake_latency_s'] == metrics.mean_handshake_latency


def test_overheard_frames_collide_at_other_receivers():
    simulation = MacSimulation(_scenario(cross_topology(2)))
    ap, second = simulation.radios[0], simulation.radios[2]
    cts = simulation._frame('CTS', 0, 1, 0, {'data_ch': 1, 'request': 0})
    rts = simulation._frame('RTS', 2, 0, 0)

    simulation.env.process(simulation._transmit(ap, cts))
    simulation.env.process(simulation._transmit(second, rts))
    simulation.env.run()

    outcomes = {
        event.detail['frame']: event.detail['outcome']
        for event in simulation.trace if event.kind == 'rx-decision'
    }
    metrics = simulation.metrics()

    assert outcomes == {'CTS': 'collision', 'RTS': 'collision'}
    assert simulation.radios[1].inbox.items == []
    assert metrics.frames_sent == metrics.collisions == 2
    assert metrics.balanced


def test_overheard_frames_on_other_channels_do_not_collide():
    simulation = MacSimulation(_scenario(cross_topology(2)))
    ap, second = simulation.radios[0], simulation.radios[2]
    second.controller.set(AntennaState(1, BeamConfig()))
    cts = simulation._frame('CTS', 0, 1, 0, {'data_ch': 1, 'request': 0})
    data = simulation._frame('DATA', 2, 1, 1)

    simulation.env.process(simulation._transmit(ap, cts))
    simulation.env.process(simulation._transmit(second, data))
    simulation.env.run()

    assert simulation.counts['delivered'] == 1
    assert simulation.counts['deafness'] == 1
    assert simulation.radios[1].inbox.items[0].frame.kind == 'CTS'


def test_damc_distance_uses_the_states_in_effect():
    scenario = _scenario(
        cross_topology(1, distance=0.5),
        control_phase=False,
        channel_selection='damc'
    )
    simulation = MacSimulation(scenario)
    station = simulation.radios[1]
    rts = simulation._frame('RTS', 1, 0, scenario.control_channel)

    simulation.env.process(simulation._transmit(station, rts))
    simulation.env.run()

    request = simulation.radios[0].inbox.items[0]
    safe = reference_plan.channels[scenario.control_channel]
    omni = AntennaState(scenario.control_channel, BeamConfig())
    gains = simulation._safe_gains(station.node, request)

    assert request.states[0].beam == _directional('-X')
    assert gains[0] > simulation.gains.gain(omni, 0.0)
    assert estimate_distance(
        request.rx_power, scenario.link.tx_power_dbm, safe.f_center, 0.0, gains
    ) == approx(0.5, rel=1e-9)
