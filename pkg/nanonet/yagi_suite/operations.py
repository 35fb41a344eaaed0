# Core modules
import csv
import json
from copy import deepcopy
from os import makedirs, path

# Third party modules
import numpy as np
import yaml

# Local modules
from .antenna import AntennaLayout, AntennaModel, ChannelPotentials
from .controller import (
    ControllerTiming,
    DacConfig,
    LutBudget,
    channel_potentials,
    lut_image,
    parse_lut_image,
    restrict_plan,
    usable_plan
)
from .exceptions import InvalidConfigError
from .netsim import FrameSizes, LinkBudget, Node, SimScenario
from .physics import (
    BiasStack,
    CalibrationPoint,
    GrapheneModel,
    GrapheneSheet,
    PhysicalConstants,
    effective_permittivity
)
from .rf_planning import MatchingModel, plan_channels
from .utilities import coerce_number, is_number


# Defaults
defaults_path = path.join(path.dirname(__file__), 'resources', 'defaults.yaml')
special_kinds = {
    ('rf', 'resonance_resistance'): 'optional-number',
    ('rf', 'quality'): 'optional-number',
    ('scenario', 'absorption'): 'optional-list',
    ('controller', 'v_max'): 'auto-or-number',
    ('controller', 'channels'): 'channel-selection',
}


def load_defaults():
    with open(defaults_path, encoding='utf-8') as defaults_file:
        return yaml.safe_load(defaults_file)


def parse_config(config_path=None, seed=None):
    """
    Read a YAML run configuration on top of the packaged defaults.
    Unknown sections or keys and values of the wrong type raise
    InvalidConfigError naming the offending entry.
    """

    config = load_defaults()
    document = {}

    if config_path:
        with open(config_path, encoding='utf-8') as config_file:
            try:
                document = yaml.safe_load(config_file) or {}
            except yaml.YAMLError as error:
                raise InvalidConfigError(
                    'cannot parse {}: {}'.format(config_path, error)
                )

    if not isinstance(document, dict):
        raise InvalidConfigError('configuration must be a mapping of sections')

    for section, values in document.items():
        if section not in config:
            raise InvalidConfigError(
                'unknown section (expected one of {})'.format(
                    ', '.join(config)
                ),
                section=section
            )
        if values is None:
            continue
        if not isinstance(values, dict):
            raise InvalidConfigError('must be a mapping', section=section)

        for key, value in values.items():
            if key not in config[section]:
                raise InvalidConfigError('unknown key', section, key)
            config[section][key] = check_value(
                section, key, value, config[section][key]
            )

    if seed is not None:
        config['scenario']['seed'] = check_value(
            'scenario', 'seed', seed, config['scenario']['seed']
        )

    return config


def check_value(section, key, value, default):
    kind = special_kinds.get((section, key))

    if kind == 'optional-number':
        return None if value is None else _number(section, key, value, float)
    if kind == 'optional-list':
        if value is None:
            return None
        return _number_list(section, key, value)
    if kind == 'auto-or-number':
        return 'auto' if value == 'auto' else _number(section, key, value, float)
    if kind == 'channel-selection':
        if value in ('auto', 'all'):
            return value
        return [
            _number(section, key, item, int)
            for item in _list(section, key, value)
        ]

    if isinstance(default, bool):
        if not isinstance(value, bool):
            raise InvalidConfigError('must be true or false', section, key)
        return value
    if isinstance(default, int):
        return _number(section, key, value, int)
    if isinstance(default, float):
        return _number(section, key, value, float)
    if isinstance(default, str):
        if not isinstance(value, str):
            raise InvalidConfigError('must be a string', section, key)
        return value
    if isinstance(default, list):
        if default and isinstance(default[0], dict):
            return _list(section, key, value)
        return _number_list(section, key, value)

    return value


def build_material(config):
    physics = config['physics']

    return GrapheneModel(
        sheet=GrapheneSheet(
            tau=physics['tau'],
            T=physics['temperature'],
            N=physics['layers']
        ),
        eps_eff=effective_permittivity(
            physics['eps_above'], physics['eps_below']
        ),
        stack=BiasStack(
            t=physics['spacer_thickness'], eps_r=physics['spacer_eps_r']
        ),
        reference=CalibrationPoint(
            length=physics['reference_length'],
            E_F=physics['reference_e_f'],
            mode=physics['reference_mode'],
            frequency=physics['reference_frequency']
        ),
        constants=PhysicalConstants(v_F=physics['fermi_velocity'])
    )


def build_antenna_model(config):
    antenna = config['antenna']

    return AntennaModel(
        material=build_material(config),
        width=antenna['width'],
        quality=antenna['quality'],
        coupling=antenna['coupling'],
        step=antenna['grid_step'],
        mode=antenna['mode']
    )


def build_layout(config):
    antenna = config['antenna']

    return AntennaLayout.default(
        length=antenna['length'],
        reflector_offset=antenna['reflector_offset'],
        director_offset=antenna['director_offset'],
        third_ring=antenna['third_ring'],
        ring_offset=antenna['ring_offset']
    )


def build_potentials(config):
    antenna = config['antenna']

    return ChannelPotentials(
        driver=antenna['driver_e_f'],
        parasitic=antenna['parasitic_e_f'],
        reflector_offset=antenna['reflector_offset'],
        director_offset=antenna['director_offset']
    )


def build_matching(config):
    rf = config['rf']

    return MatchingModel(
        Z_S=rf['source_impedance'],
        Q_res=rf['quality'],
        R_res=rf['resonance_resistance'],
        reference_frequency=rf['reference_frequency'],
        reference_bandwidth=rf['reference_bandwidth'],
        threshold_db=rf['threshold_db']
    )


def build_plan(config, v_range=None):
    """
    The channel plan of the rf section, at its own voltage range
    unless `v_range` is given.
    """

    material = build_material(config)

    return plan_channels(
        config['rf']['v_range'] if v_range is None else v_range,
        stack=material.stack,
        L=config['antenna']['length'],
        material=material,
        m=build_matching(config),
        lowest=config['rf']['lowest_e_f'],
        mode=config['antenna']['mode']
    )


def build_dac(config):
    controller = config['controller']
    v_max = controller['v_max']

    return DacConfig(
        bits=controller['bits'],
        v_max=None if v_max == 'auto' else v_max,
        settle_time=controller['settle_time']
    )


def build_timing(config):
    return ControllerTiming(
        lut_read=config['controller']['lut_read'],
        graphene_response=config['controller']['graphene_response']
    )


def build_budget(config):
    controller = config['controller']

    return LutBudget(
        capacity_bytes=controller['capacity_bytes'],
        line_bits=controller['line_bits'],
        max_states=controller['max_states']
    )


def build_controller_plan(config):
    """
    The channels the controller stores: the representable subset of the
    rf plan ('auto'), the whole plan ('all') or listed indices.
    """

    plan = build_plan(config)
    selection = config['controller']['channels']

    if selection == 'all':
        return plan
    if selection == 'auto':
        return usable_plan(
            plan,
            build_dac(config),
            config['antenna']['parasitic_ratio'],
            build_material(config)
        )

    for index in selection:
        if not 0 <= index < plan.count:
            raise InvalidConfigError(
                'no channel {} in a plan of {}'.format(index, plan.count),
                'controller', 'channels'
            )

    return restrict_plan(plan, selection)


def build_channel_potentials(config, plan):
    antenna = config['antenna']

    return channel_potentials(
        plan,
        antenna['parasitic_ratio'],
        antenna['reflector_offset'],
        antenna['director_offset']
    )


def build_scenario(config):
    scenario = config['scenario']
    nodes = []

    for number, entry in enumerate(scenario['nodes']):
        if not isinstance(entry, dict):
            raise InvalidConfigError(
                'node {} must be a mapping'.format(number), 'scenario', 'nodes'
            )
        unknown = set(entry) - {'id', 'x', 'y', 'role', 'start'}
        missing = {'id', 'x', 'y'} - set(entry)
        if unknown or missing:
            raise InvalidConfigError(
                'node {}: unknown {} / missing {}'.format(
                    number, sorted(unknown), sorted(missing)
                ),
                'scenario', 'nodes'
            )
        nodes.append(
            Node(
                id=_number('scenario', 'nodes', entry['id'], int),
                position=(
                    _number('scenario', 'nodes', entry['x'], float),
                    _number('scenario', 'nodes', entry['y'], float)
                ),
                role=entry.get('role', 'station'),
                start=_number('scenario', 'nodes', entry.get('start', 0.0), float)
            )
        )

    return SimScenario(
        nodes=tuple(nodes),
        plan=build_controller_plan(config),
        control_channel=scenario['control_channel'],
        absorption=(
            tuple(scenario['absorption'])
            if scenario['absorption'] is not None else None
        ),
        link=LinkBudget(
            tx_power_dbm=scenario['tx_power_dbm'],
            noise_dbm=scenario['noise_dbm'],
            snr_threshold_db=scenario['snr_threshold_db']
        ),
        frames=FrameSizes(
            rts=scenario['rts_bits'],
            cts=scenario['cts_bits'],
            data=scenario['data_bits'],
            ack=scenario['ack_bits']
        ),
        rate=scenario['rate'],
        seed=scenario['seed'],
        duration=scenario['duration'],
        packets=scenario['packets'],
        max_retries=scenario['max_retries'],
        initial_window=scenario['initial_window'],
        control_phase=scenario['control_phase'],
        channel_selection=scenario['channel_selection'],
        dac=build_dac(config),
        timing=build_timing(config),
        antenna=build_antenna_model(config),
        parasitic_ratio=config['antenna']['parasitic_ratio'],
        rho=scenario['rho']
    )


def write_csv(rows, output_filepath, fieldnames=None, digits=None):
    """
    Write a list of dicts as CSV. With `digits`, floats are written with
    that many significant digits, otherwise in full precision.
    """

    rows = list(rows)
    fieldnames = fieldnames or (list(rows[0]) if rows else [])
    _prepare(output_filepath)

    with open(output_filepath, 'w', newline='', encoding='utf-8') as output_file:
        writer = csv.DictWriter(output_file, fieldnames=fieldnames)
        writer.writeheader()
        for row in rows:
            writer.writerow(
                {name: _format(row[name], digits) for name in fieldnames}
            )

    return output_filepath


def write_json(data, output_filepath):
    _prepare(output_filepath)

    with open(output_filepath, 'w', encoding='utf-8') as output_file:
        json.dump(_plain(data), output_file, sort_keys=True, indent=2)
        output_file.write('\n')

    return output_filepath


def write_jsonl(records, output_filepath):
    _prepare(output_filepath)

    with open(output_filepath, 'w', encoding='utf-8') as output_file:
        for record in records:
            output_file.write(
                json.dumps(
                    _plain(record), sort_keys=True, separators=(',', ':')
                ) + '\n'
            )

    return output_filepath


def write_text(text, output_filepath):
    _prepare(output_filepath)

    with open(output_filepath, 'w', encoding='utf-8') as output_file:
        output_file.write(text)

    return output_filepath


def write_lut_image(luts, output_filepath):
    _prepare(output_filepath)

    with open(output_filepath, 'wb') as output_file:
        output_file.write(lut_image(luts))

    return output_filepath


def read_lut_image(filepath, element_count=10, dac=DacConfig(), stack=BiasStack()):
    with open(filepath, 'rb') as image_file:
        return parse_lut_image(image_file.read(), element_count, dac, stack)


def lut_listing(luts):
    """
    A JSON-friendly view of both tables.
    """

    return {
        'dac': {
            'bits': luts.dac.bits,
            'v_max_v': luts.dac.v_max,
            'settle_time_s': luts.dac.settle_time,
        },
        'bias': [
            {
                'channel': index,
                'b_off': levels.b_off,
                'b_on1': levels.b_on1,
                'b_on2': levels.b_on2,
                'line': '0x{:08X}'.format(levels.pack()),
            }
            for index, levels in enumerate(luts.bias)
        ],
        'sel': [
            {
                'beam': beam.label,
                'word': word,
                'line': '0x{:08X}'.format(word),
            }
            for beam, word in luts.sel.items()
        ],
        'lines': luts.lines,
        'bytes': luts.lines * 4,
    }


def _prepare(output_filepath):
    directory = path.dirname(output_filepath)
    if directory:
        makedirs(directory, exist_ok=True)


def _format(value, digits):
    if isinstance(value, (float, np.floating)):
        if digits:
            return '{:.{}g}'.format(float(value), digits)
        return repr(float(value))

    return value


def _plain(data):
    """
    Turn numpy scalars and tuples into JSON-native values.
    """

    if isinstance(data, dict):
        return {str(key): _plain(value) for key, value in data.items()}
    if isinstance(data, (list, tuple)):
        return [_plain(value) for value in data]
    if isinstance(data, np.generic):
        return data.item()

    return deepcopy(data)


def _number(section, key, value, kind):
    number = coerce_number(value)
    if number is None:
        raise InvalidConfigError('must be a number', section, key)
    if kind is int:
        if not np.isfinite(number) or float(number) != int(number):
            raise InvalidConfigError('must be an integer', section, key)
        return int(number)

    return float(number)


def _list(section, key, value):
    if not isinstance(value, list):
        raise InvalidConfigError('must be a list', section, key)

    return value


def _number_list(section, key, value):
    values = _list(section, key, value)
    if not all(is_number(item) for item in values):
        raise InvalidConfigError('must be a list of numbers', section, key)

    return [_number(section, key, item, float) for item in values]
