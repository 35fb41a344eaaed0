# Core modules
import sys
from dataclasses import replace
from os import path

# Third party modules
import numpy as np
from jinja2 import Template

# Local modules
from . import __version__
from .antenna import (
    BeamConfig,
    evaluate_beam,
    residual_conductivity_sweep
)
from .controller import (
    AntennaState,
    compile_luts,
    minimum_dac_bits,
    quantization_report,
    set_state
)
from .exceptions import ConfigError, NumericalError
from .netsim import audit_channel_bookings, run_mac
from .operations import (
    build_antenna_model,
    build_budget,
    build_channel_potentials,
    build_controller_plan,
    build_dac,
    build_layout,
    build_matching,
    build_material,
    build_plan,
    build_potentials,
    build_scenario,
    build_timing,
    lut_listing,
    parse_config,
    write_csv,
    write_json,
    write_jsonl,
    write_lut_image,
    write_text
)
from .physics import (
    gate_voltage,
    kubo_conductivity,
    layer_conductivity,
    surface_impedance
)
from .rf_planning import (
    channel_bandwidth,
    channel_count_table,
    channel_opening_voltages
)
from .utilities import frequency_grid


# Defaults
default_template = path.join(
    path.dirname(__file__),
    'resources',
    'report.txt'
)
commands = ('kubo', 'pattern', 'channels', 'lut', 'simulate')
opposite_directions = {'+X': '-X', '-X': '+X', '+Y': '-Y', '-Y': '+Y'}
mirror_tolerance = 1e-9
pattern_digits = 6


class Suite():
    """
    Runs one experiment command: reads the configuration, computes, and
    writes the result files plus a report into `output_path/<command>`.
    Configuration problems exit with code 2, numerical failures with 3.
    """

    def __init__(
        self,
        command,
        config_path=None,
        output_path='build',
        seed=None,
        template_path=default_template,
        beam='+Y',
        channel=None,
        rho=0.0,
        sweep_rho=False,
        mirror_check=False,
        directional_only=False,
        quiet=False,
        out=sys.stdout,
        err=sys.stderr,
    ):
        # Properties
        self.quiet = quiet
        self.command = command
        self.config_path = config_path
        self.output_path = path.join(output_path, command)
        self._out = out
        self._err = err
        self.notes = []

        if command not in commands:
            self._fail("Unknown command '{}'".format(command), 2)

        try:
            self.config = parse_config(config_path, seed)
            with open(template_path, encoding="utf-8") as template_file:
                self.template = Template(
                    template_file.read(),
                    trim_blocks=True,
                    lstrip_blocks=True,
                    keep_trailing_newline=True
                )

            if command == 'pattern':
                report = self.pattern(
                    beam, channel, rho, sweep_rho, mirror_check
                )
            elif command == 'simulate':
                report = self.simulate(directional_only)
            else:
                report = getattr(self, command)()
        except (ConfigError, FileNotFoundError) as error:
            self._fail(str(error), 2)
        except NumericalError as error:
            self._fail(str(error), 3)

        self.files = report['files'] + [self._write_report(report)]
        self._print("Wrote:\n- {}".format('\n- '.join(self.files)))

    def kubo(self):
        """
        Conductivity and surface impedance over the configured E_F list
        and frequency grid.
        """

        physics = self.config['physics']
        material = build_material(self.config)
        constants = material.constants
        frequencies = frequency_grid(
            physics['kubo_f_start'],
            physics['kubo_f_stop'],
            physics['kubo_f_points']
        )

        rows = []
        for E_F in physics['kubo_e_f']:
            sheet = material.sheet_at(E_F)
            for f in frequencies:
                sigma = layer_conductivity(
                    kubo_conductivity(sheet, float(f), constants), sheet.N
                )
                impedance = surface_impedance(sigma)
                rows.append({
                    'e_f_ev': E_F,
                    'f_hz': float(f),
                    'sigma_re': sigma.value.real,
                    'sigma_im': sigma.value.imag,
                    'z_re': impedance.value.real,
                    'z_im': impedance.value.imag,
                })

        reference = material.reference
        sigma_ref = kubo_conductivity(
            material.sheet_at(reference.E_F), reference.frequency, constants
        )
        sigma_zero = kubo_conductivity(
            material.sheet_at(0.0), reference.frequency, constants
        )

        return {
            'files': [
                write_csv(rows, path.join(self.output_path, 'kubo.csv'))
            ],
            'inputs': [
                ('E_F values (eV)', physics['kubo_e_f']),
                ('frequencies', '{} points, {:g}-{:g} Hz'.format(
                    len(frequencies), frequencies[0], frequencies[-1]
                )),
                ('temperature (K)', material.sheet.T),
                ('relaxation time (s)', material.sheet.tau),
                ('layers', material.sheet.N),
            ],
            'results': [
                ('rows', len(rows)),
                ('sigma at {} eV, {:g} Hz (S)'.format(
                    reference.E_F, reference.frequency
                ), sigma_ref.value),
                ('zero-bias residual |sigma(0)|/|sigma(E_ref)|',
                    abs(sigma_zero.value) / abs(sigma_ref.value)),
                ('gate voltage for {} eV (V)'.format(reference.E_F),
                    gate_voltage(reference.E_F, material.stack, constants)),
                ('resonance at 0.2 eV (Hz)', material.resonance(
                    reference.length, 0.2, reference.mode
                )),
            ],
        }

    def pattern(
        self,
        beam='+Y',
        channel=None,
        rho=0.0,
        sweep_rho=False,
        mirror_check=False
    ):
        layout = build_layout(self.config)
        model = build_antenna_model(self.config)
        beam_config = BeamConfig.parse(beam)

        if channel is None:
            potentials = build_potentials(self.config)
            frequency = None
        else:
            plan = build_plan(self.config)
            if not 0 <= channel < plan.count:
                raise ConfigError(
                    'no channel {} in a plan of {}'.format(channel, plan.count),
                    key='--channel'
                )
            potentials = build_channel_potentials(self.config, plan)[channel]
            frequency = plan.channels[channel].f_center

        pattern, metrics = evaluate_beam(
            layout, beam_config, potentials, frequency, model, rho
        )

        rows = [
            {
                'theta_deg': theta,
                'phi_deg': phi,
                'directivity_dbi': value,
            }
            for theta, line in zip(pattern.theta, pattern.directivity_dbi)
            for phi, value in zip(pattern.phi, line)
        ]
        summary = dict(
            metrics.as_dict(),
            beam=beam_config.label,
            channel=channel,
            frequency_hz=pattern.frequency,
            rho=rho,
            driver_e_f_ev=potentials.driver,
            parasitic_e_f_ev=potentials.parasitic
        )
        notes = []

        if mirror_check:
            if beam_config.mode == 'omni':
                notes.append('mirror check skipped for the omni beam')
            else:
                mirror = BeamConfig(
                    'directional', opposite_directions[beam_config.direction]
                )
                mirrored = evaluate_beam(
                    layout, mirror, potentials, pattern.frequency, model, rho
                )[1]
                summary['mirror_beam'] = mirror.label
                summary['mirror_consistent'] = all(
                    abs(getattr(metrics, name) - getattr(mirrored, name)) <=
                    mirror_tolerance
                    for name in (
                        'peak_gain',
                        'peak_directivity',
                        'beamwidth_3db',
                        'front_to_back'
                    )
                )

        files = [
            write_csv(
                rows,
                path.join(self.output_path, 'pattern.csv'),
                digits=pattern_digits
            ),
            write_json(summary, path.join(self.output_path, 'metrics.json')),
        ]

        if sweep_rho:
            fractions = [
                (fraction, 'config')
                for fraction in self.config['antenna']['residual_fractions']
            ]
            # the residual the configured DAC leaves on its off code
            quantized = quantization_report(
                (potentials.driver, potentials.parasitic, 0.0),
                build_dac(self.config),
                pattern.frequency,
                stack=model.material.stack,
                material=model.material
            )
            fractions.append((quantized.rho, 'dac'))
            sweep = residual_conductivity_sweep(
                layout, beam_config, pattern.frequency,
                [fraction for fraction, _ in fractions], potentials, model
            )
            files.append(
                write_csv(
                    [
                        dict(metrics.as_dict(), rho=fraction, source=source)
                        for (fraction, source), metrics in zip(fractions, sweep)
                    ],
                    path.join(self.output_path, 'rho_sweep.csv')
                )
            )

        return {
            'files': files,
            'inputs': [
                ('beam', beam_config.label),
                ('channel', 'antenna section' if channel is None else channel),
                ('potentials (eV)', (potentials.driver, potentials.parasitic)),
                ('frequency (Hz)', pattern.frequency),
                ('residual fraction', rho),
                ('elements', len(layout)),
            ],
            'results': sorted(
                (name, value) for name, value in summary.items()
                if name not in ('beam', 'channel', 'frequency_hz', 'rho')
            ),
            'notes': notes,
        }

    def channels(self):
        rf = self.config['rf']
        material = build_material(self.config)
        matching = build_matching(self.config)
        length = self.config['antenna']['length']
        mode = self.config['antenna']['mode']

        table = channel_count_table(
            rf['v_grid'],
            rf['t_grid'],
            rf['eps_grid'],
            length,
            material,
            matching,
            rf['lowest_e_f'],
            mode
        )
        plan = build_plan(self.config)
        opening = channel_opening_voltages(
            plan.count + 1,
            material.stack,
            length,
            material,
            matching,
            rf['lowest_e_f'],
            mode
        )
        plan_fields = ['index', 'f_center_hz', 'bandwidth_hz', 'e_f_ev', 'v_gate_v']

        return {
            'files': [
                write_csv(
                    table, path.join(self.output_path, 'channel_count.csv')
                ),
                write_csv(
                    plan.rows(),
                    path.join(self.output_path, 'channels.csv'),
                    fieldnames=plan_fields
                ),
            ],
            'inputs': [
                ('v_range (V)', rf['v_range']),
                ('voltage grid (V)', rf['v_grid']),
                ('spacer thicknesses (m)', rf['t_grid']),
                ('spacer permittivities', rf['eps_grid']),
                ('source impedance (ohm)', matching.Z_S),
            ],
            'results': [
                ('resonator Q', matching.quality),
                ('bandwidth at {:g} Hz (Hz)'.format(matching.reference_frequency),
                    channel_bandwidth(matching.reference_frequency, matching)),
                ('channels at {:g} V'.format(rf['v_range']), plan.count),
                ('channel opening voltages (V)',
                    [round(voltage, 3) for voltage in opening]),
            ],
        }

    def lut(self):
        material = build_material(self.config)
        dac = build_dac(self.config)
        plan = build_controller_plan(self.config)
        potentials = build_channel_potentials(self.config, plan)
        luts = compile_luts(
            plan,
            build_layout(self.config),
            potentials,
            dac,
            build_budget(self.config),
            material
        )
        latency = set_state(
            AntennaState(0, BeamConfig()),
            luts,
            timing=build_timing(self.config),
            material=material
        ).latency

        full_plan = build_plan(self.config)
        if plan.count < full_plan.count:
            self._note(
                "{} of {} planned channels fit the controller".format(
                    plan.count, full_plan.count
                )
            )
        bits = minimum_dac_bits(
            full_plan,
            build_channel_potentials(self.config, full_plan),
            v_max=dac.v_max,
            settle_time=dac.settle_time
        )

        return {
            'files': [
                write_lut_image(luts, path.join(self.output_path, 'lut.bin')),
                write_json(
                    lut_listing(luts), path.join(self.output_path, 'lut.json')
                ),
            ],
            'inputs': [
                ('DAC bits', dac.bits),
                ('channel selection', self.config['controller']['channels']),
                ('elements', luts.element_count),
            ],
            'results': [
                ('channels stored', len(luts.bias)),
                ('lines', luts.lines),
                ('bytes', luts.lines * 4),
                ('full scale (V)', luts.dac.v_max),
                ('reconfiguration latency (s)', latency),
                ('bits needed for the whole plan',
                    bits if bits is not None else 'more than 8'),
            ],
        }

    def simulate(self, directional_only=False):
        scenario = build_scenario(self.config)
        if directional_only:
            scenario = replace(scenario, control_phase=False)

        trace, metrics = run_mac(scenario)
        if not metrics.balanced:
            self._note("frame accounting does not balance")
        summary = dict(
            metrics.as_dict(),
            balanced=metrics.balanced,
            booking_conflicts=len(audit_channel_bookings(trace)),
            seed=scenario.seed,
            control_phase=scenario.control_phase
        )

        return {
            'files': [
                write_jsonl(
                    (event.as_dict() for event in trace),
                    path.join(self.output_path, 'trace.jsonl')
                ),
                write_json(summary, path.join(self.output_path, 'metrics.json')),
            ],
            'inputs': [
                ('nodes', len(scenario.nodes)),
                ('channels', scenario.resolved_plan().count),
                ('control phase', scenario.control_phase),
                ('channel selection', scenario.channel_selection),
                ('duration (s)', scenario.duration),
            ],
            'results': [
                (name, summary[name]) for name in (
                    'frames_sent',
                    'delivered',
                    'collisions',
                    'deafness_misses',
                    'in_flight',
                    'data_delivered',
                    'dropped',
                    'mean_handshake_latency_s',
                    'throughput_bps',
                    'reconfigurations',
                    'balanced',
                )
            ],
        }

    def _write_report(self, report):
        text = self.template.render(
            version=__version__,
            command=self.command,
            config_path=self.config_path,
            seed=self.config['scenario']['seed'],
            inputs=report['inputs'],
            results=[
                (name, _describe(value)) for name, value in report['results']
            ],
            notes=report.get('notes', []) + self.notes,
            files=report['files']
        )

        return write_text(text, path.join(self.output_path, 'report.txt'))

    def _print(self, message, channel=None):
        if not self.quiet:
            print(message, file=channel or self._out)

    def _note(self, message):
        self.notes.append(message)
        self._print("Notice: " + message, channel=self._err)

    def _fail(self, message, code=1):
        print("Error: " + message, file=self._err)
        sys.exit(code)


def _describe(value):
    if isinstance(value, (float, np.floating)):
        return '{:.6g}'.format(value)
    if isinstance(value, complex):
        return '{:.6g}{:+.6g}j'.format(value.real, value.imag)

    return value
