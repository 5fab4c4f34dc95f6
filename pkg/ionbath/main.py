import argparse
import contextlib
import logging
import os
import sys
from typing import List, Optional

import yaml
from pydantic import ValidationError

from .config import load_config, log_level, resolve_output_path
from .errors import ConfigError, IonbathError, ValidationFailure
from .experiments import ExperimentResult, run_otto, run_protect, run_reset, run_steady, run_synth
from .output import summary_path, write_frame, write_summary
from .schemas import ExperimentConfig
from .validation import format_report, run_suite

# get logger:
log = logging.getLogger(__name__)

"""
This is the command line interface: one subcommand per experiment plus the invariant suite.
Exit codes: 0 success, 1 failed validation or a physics error, 2 bad config or arguments.
"""

EXIT_FAILURE = 1
EXIT_CONFIG = 2


def configure_logging(args: argparse.Namespace):
    level = log_level()
    if args.verbose:
        level = "INFO"
    if args.debug:
        level = "DEBUG"
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format='%(asctime)s %(levelname)s %(module)s- %(funcName)s: %(message)s',
                        datefmt='%Y-%m-%d %H:%M:%S')


@contextlib.contextmanager
def error_handling():
    try:
        yield
    except (ConfigError, ValidationError, yaml.YAMLError) as e:
        log.error("Config error: %s", e)
        raise SystemExit(EXIT_CONFIG) from e
    except ValidationFailure as e:
        log.error("Validation failed: %s", e)
        raise SystemExit(EXIT_FAILURE) from e
    except (IonbathError, ValueError) as e:
        log.error("Run failed: %s", e)
        raise SystemExit(EXIT_FAILURE) from e
    except Exception as e:
        log.exception("Internal error")
        raise SystemExit(EXIT_FAILURE) from e


def frame_path(result_path: str, suffix: str) -> str:
    if not suffix:
        return result_path
    stem, extension = os.path.splitext(result_path)
    return f"{stem}.{suffix}{extension or '.csv'}"


def write_result(result: ExperimentResult, config: ExperimentConfig) -> List[str]:
    """
    Writes every frame of a result next to each other plus the run summary
    :return: written paths, the main result file first
    """
    result_path = resolve_output_path(config)
    written = []
    for suffix in sorted(result.frames):
        path = frame_path(result_path, suffix)
        write_frame(result.frames[suffix], path)
        written.append(path)
    path = summary_path(result_path)
    write_summary(result.summary, path)
    written.append(path)
    if not result.summary.passed:
        failed = [name for name, ok in result.summary.guards.items() if not ok]
        log.warning("%s: guards not satisfied: %s", result.summary.command, ", ".join(sorted(failed)))
    return written


def _load(args: argparse.Namespace) -> ExperimentConfig:
    return load_config(args.config, dim=args.dim, out=args.out)


def cmd_synth(args: argparse.Namespace) -> List[str]:
    config = _load(args)
    return write_result(run_synth(config), config)


def cmd_protect(args: argparse.Namespace) -> List[str]:
    config = _load(args)
    return write_result(run_protect(config), config)


def cmd_steady(args: argparse.Namespace) -> List[str]:
    config = _load(args)
    return write_result(run_steady(config), config)


def cmd_reset(args: argparse.Namespace) -> List[str]:
    config = _load(args)
    return write_result(run_reset(config), config)


def cmd_otto(args: argparse.Namespace) -> List[str]:
    config = _load(args)
    return write_result(run_otto(config, numeric=args.numeric, synthesize=args.synthesize), config)


def cmd_validate(args: argparse.Namespace) -> List[str]:
    extra = _load(args) if args.config else None
    checks = run_suite(extra)
    print(format_report(checks), file=sys.stdout)
    failed = [check.name for check in checks if not check.passed]
    if failed:
        raise ValidationFailure(f"{len(failed)} checks failed: {', '.join(failed)}")
    return []


COMMANDS = {
    "synth": cmd_synth,
    "protect": cmd_protect,
    "steady": cmd_steady,
    "reset": cmd_reset,
    "otto": cmd_otto,
    "validate": cmd_validate,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog='ionbath', description='Reservoir engineering of a trapped ion motional mode')
    subparsers = parser.add_subparsers(dest='command', help='Subcommands')
    subparsers.required = True

    # flags every subcommand takes:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--out', type=str, dest='out', help="result CSV path, overrides output_path")
    common.add_argument('--dim', type=int, dest='dim', help="Fock space truncation, overrides dim")
    common.add_argument('--verbose', action='store_true', dest='verbose', help="log at INFO level")
    common.add_argument('--debug', action='store_true', dest='debug', help="log at DEBUG level")

    helps = {
        'synth': 'evolve a state through engineering stages',
        'protect': 'protect a state against a dissipation channel',
        'steady': 'steady state of the engineered channels',
        'reset': 'two-step reset of the electronic levels',
        'otto': 'efficiency of the quench-regime Otto cycle',
    }
    for command, text in helps.items():
        sub = subparsers.add_parser(command, parents=[common], help=text)
        sub.add_argument('--config', type=str, dest='config', required=True, help="YAML experiment config")
        if command == 'otto':
            sub.add_argument('--numeric', action='store_true', dest='numeric',
                             help="add trace-based energetics next to the closed forms")
            sub.add_argument('--synthesize', action='store_true', dest='synthesize',
                             help="produce rho_A and rho_C with engineering stages from the vacuum")

    validate = subparsers.add_parser('validate', parents=[common], help='run the built-in invariant suite')
    validate.add_argument('--config', type=str, dest='config', help="also run this config and report its guards")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(args)
    log.debug("Running %s", args.command)
    with error_handling():
        for path in COMMANDS[args.command](args):
            print(path, file=sys.stdout)
    return 0


if __name__ == '__main__':
    sys.exit(main())
