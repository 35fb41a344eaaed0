# Core modules
import argparse
import sys
import pkg_resources

# Local modules
from .suite import Suite


def parse_arguments(arguments):
    """
    Parse command-line options for the yagi-suite command-line script
    """

    parser = argparse.ArgumentParser(
        prog='yagi-suite',
        description=(
            "Experiments on a reconfigurable graphene Yagi-Uda antenna: "
            "material model, beam patterns, channel planning, the antenna "
            "controller LUTs and a multichannel MAC simulation."
        )
    )

    parser.add_argument(
        '--config',
        dest='config_path',
        help=(
            "Path to a YAML run configuration "
            "(defaults to the built-in values)"
        )
    )
    parser.add_argument(
        '--out',
        dest='output_path',
        help="Destination folder for result files (default: ./build)"
    )
    parser.add_argument(
        '--seed',
        type=int,
        help="Random seed for the MAC simulation (overrides scenario.seed)"
    )
    parser.add_argument(
        '--template-path',
        help=(
            "Path to an alternate report template "
            "(defaults to using the built-in template)"
        )
    )
    parser.add_argument(
        '--quiet',
        action='store_true',
        help="Suppress output"
    )
    parser.add_argument(
        '--version',
        action='store_true',
        help="Show the currently installed version of yagi-suite."
    )

    commands = parser.add_subparsers(dest='command', metavar='command')

    commands.add_parser(
        'kubo',
        help="Sheet conductivity and surface impedance sweep (kubo.csv)"
    )

    pattern = commands.add_parser(
        'pattern',
        help="Radiation pattern and metrics of one beam"
    )
    pattern.add_argument(
        '--beam',
        choices=['omni', '+X', '-X', '+Y', '-Y'],
        help="Beam to evaluate (default: +Y). Write --beam=-X for the negative axes"
    )
    pattern.add_argument(
        '--channel',
        type=int,
        help=(
            "Evaluate at this planned channel "
            "(defaults to the antenna section potentials)"
        )
    )
    pattern.add_argument(
        '--rho',
        type=float,
        help="Residual conductivity of tuned-out elements (default: 0)"
    )
    pattern.add_argument(
        '--sweep-rho',
        action='store_true',
        help="Also sweep the configured residual fractions (rho_sweep.csv)"
    )
    pattern.add_argument(
        '--mirror-check',
        action='store_true',
        help="Compare the metrics with the opposite beam"
    )

    commands.add_parser(
        'channels',
        help="Channel count over voltage and gate stack grids"
    )
    commands.add_parser(
        'lut',
        help="Compile the controller LUTs (lut.bin, lut.json)"
    )

    simulate = commands.add_parser(
        'simulate',
        help="Run the multichannel MAC simulation (trace.jsonl)"
    )
    simulate.add_argument(
        '--directional-only',
        action='store_true',
        help="Skip the omni control phase: RTS are sent directionally"
    )

    arguments = vars(parser.parse_args(arguments))

    if arguments['version']:
        print(
            pkg_resources.get_distribution(
                "nanonet-yagi-suite"
            ).version
        )
        sys.exit()
    else:
        del arguments['version']

    if not arguments['command']:
        parser.error("a command is required")

    # Return only defined arguments
    return {
        name: value for name, value in arguments.items()
        if value is not None and value is not False
    }


def main(system_arguments):
    """
    The starting point for yagi-suite.
    Intended to be run through the command-line.
    """

    arguments = parse_arguments(system_arguments)
    Suite(**arguments)


if __name__ == "__main__":
    main(sys.argv[1:])
