"""Command-line entry point for the backscatter mode-selection toolkit.

Run ``python -m src.cli --help`` for usage.
"""

import argparse
import os
import sys
from typing import Any, Optional

from src.commands import COMMAND_SPECS, COMMANDS, ExperimentService, build_command_dispatch
from src.config import RunConfig, load_config, parse_assignment
from src.constants import ENV_LOG_LEVEL, ENV_OUTPUT_DIR, METHODS, PRESET_DEFAULT, PRESETS
from src.exceptions import BackscatterError, ConfigurationError
from src.utils import set_package_log_level, setup_logging

logger = setup_logging(__name__)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_CONFIG = 2
EXIT_INTERRUPTED = 130


def build_parser() -> argparse.ArgumentParser:
    commands = "\n".join(f"  {name:<15} {description}" for name, description in COMMAND_SPECS)
    parser = argparse.ArgumentParser(
        prog="python -m src.cli",
        description="Ambient backscatter mode selection - solve, train, simulate and sweep",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog=f"""
Commands:
{commands}

Examples:
  # Optimal policy for the bundled preset at 2 W
  python -m src.cli solve --pt 2

  # Compare methods over the source-power sweep
  python -m src.cli sweep --output results/sweep

  # Repeat a run from its manifest
  python -m src.cli --config results/sweep/manifest.yaml

Configuration:
  YAML sections merge over the preset; see CONFIG_GUIDE.md.
  {ENV_LOG_LEVEL} and {ENV_OUTPUT_DIR} may be set in a .env file.
        """
    )
    parser.add_argument(
        "command",
        nargs="?",
        choices=COMMANDS,
        help="Command to run (default: the command recorded in --config)"
    )
    parser.add_argument("--config", "-c", help="YAML config file or manifest")
    parser.add_argument(
        "--preset",
        choices=sorted(PRESETS),
        default=PRESET_DEFAULT,
        help=f"Preset the config file is merged over (default: {PRESET_DEFAULT})"
    )
    parser.add_argument("--output", "-o", help="Output directory")
    parser.add_argument("--seed", type=int, help="Seed for simulation, training and detector streams")
    parser.add_argument("--pt", type=float, help="Source transmit power in watts")
    parser.add_argument("--gamma", type=float, help="Discount factor for the solver and the agent")
    parser.add_argument("--method", choices=METHODS, help="Policy used by simulate")
    parser.add_argument(
        "--set",
        action="append",
        default=[],
        metavar="SECTION.KEY=VALUE",
        help="Override any config key (repeatable; value parsed as YAML)"
    )
    parser.add_argument("--log-level", help="Logging level (default: $%s or INFO)" % ENV_LOG_LEVEL)
    parser.add_argument("--log-file", help="Also write logs to this file")
    return parser


def collect_overrides(args: argparse.Namespace) -> dict[str, Any]:
    """Translate command-line flags into dotted config overrides.

    Named flags win over ``--set`` entries for the same key.
    """
    overrides: dict[str, Any] = {}
    for text in args.set:
        key, value = parse_assignment(text)
        overrides[key] = value

    env_output = os.getenv(ENV_OUTPUT_DIR)
    if env_output and not args.output:
        overrides["output"] = env_output
    if args.output:
        overrides["output"] = args.output
    if args.pt is not None:
        overrides["system.p_t"] = args.pt
    if args.seed is not None:
        for key in ("sim.seed", "ql.seed", "detector.seed"):
            overrides[key] = args.seed
    if args.gamma is not None:
        for key in ("system.gamma", "solver.gamma", "ql.gamma"):
            overrides[key] = args.gamma
    if args.method is not None:
        overrides["run.method"] = args.method
    return overrides


def run_command(command: Optional[str], config: RunConfig) -> list:
    """Dispatch one command against ``config``; returns the written paths."""
    command = command or config.command
    if command is None:
        raise ConfigurationError("command", "no command given and the config records none")
    if command not in COMMANDS:
        raise ConfigurationError("run.command", f"unknown command {command!r}")
    service = ExperimentService(config)
    return build_command_dispatch(service)[command]()


def main(argv: Optional[list[str]] = None) -> int:
    """Parse arguments, load the configuration and run the command.

    Returns:
        0 on success, 2 on configuration errors, 1 on other failures,
        130 when interrupted
    """
    args = build_parser().parse_args(argv)
    if args.log_level:
        os.environ[ENV_LOG_LEVEL] = args.log_level
    if args.log_level or args.log_file:
        set_package_log_level(args.log_level, args.log_file)

    try:
        config = load_config(args.config, args.preset, collect_overrides(args))
        written = run_command(args.command, config)
        print(f"Wrote {len(written)} files to {config.output}")
        return EXIT_OK

    except ConfigurationError as e:
        logger.critical("Configuration error: %s", str(e))
        print(f"\n❌ Configuration Error: {str(e)}\n", file=sys.stderr)
        return EXIT_CONFIG
    except BackscatterError as e:
        logger.critical("Fatal error: %s", str(e))
        print(f"\n❌ Error: {str(e)}\n", file=sys.stderr)
        return EXIT_FAILURE
    except KeyboardInterrupt:
        logger.info("Run interrupted by user")
        print("\nInterrupted.", file=sys.stderr)
        return EXIT_INTERRUPTED
    except Exception as e:
        logger.critical("Unexpected error: %s", str(e), exc_info=True)
        print(f"\n❌ Unexpected Error: {str(e)}\n", file=sys.stderr)
        print("Check logs for details.", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
