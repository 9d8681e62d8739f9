"""
codedcomp Command Line

Batch front end for the coded-computation experiments. Every command writes
a CSV or JSON document whose header echoes the full experiment
configuration; identical invocations produce identical bytes.

Exit codes: 0 success, 2 usage error, 3 numeric or budget failure,
4 internal invariant failure.
"""

import argparse
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

from loguru import logger
from pydantic import ValidationError

from .config import CodedCompConfig, ExperimentConfig
from .errors import CodedCompError
from .orchestrator import ExperimentOrchestrator, RunOutput, setup_logging
from .utils.export import render_csv, render_json, write_text

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NUMERIC = 3
EXIT_INTERNAL = 4


def _int_list(text: str) -> List[int]:
    try:
        return [int(part) for part in text.split(",") if part.strip()]
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got '{text}'") from e


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="codedcomp", description="Coded distributed computing over erasure channels")
    parser.add_argument("--template", default=None, help="Configuration template (default: environment)")
    parser.add_argument("--log-level", default=None, help="Console log level")
    parser.add_argument("--workers", type=int, default=None, help="Worker processes for Monte-Carlo chunks")

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="Random seed (default: CODEDCOMP_SEED or 2021)")
    common.add_argument("--output", "-o", default=None, help="Output file (default: stdout)")
    common.add_argument("--format", choices=["csv", "json"], default="csv")
    common.add_argument("--mu", type=float, default=1.0, help="Straggling parameter")
    common.add_argument("--dist", choices=["exponential", "weibull"], default="exponential")
    common.add_argument("--alpha", type=float, default=None, help="Weibull shape (weibull only)")
    common.add_argument("--trials", type=int, default=None, help="Monte-Carlo trials (default: CODEDCOMP_MC_TRIALS)")
    common.add_argument("--eps-design", type=float, default=0.1, help="Polar design erasure probability")

    sub = parser.add_subparsers(dest="command", required=True)

    analyze = sub.add_parser("analyze", parents=[common], help="Optimal k and average execution time")
    analyze.add_argument("--scheme", required=True)
    analyze.add_argument("--n", type=_int_list, default=[])
    analyze.add_argument("--m", type=int, default=None)
    analyze.add_argument("--n-max", type=int, default=None)
    analyze.add_argument("--max-evaluations", type=int, default=None)

    bler = sub.add_parser("bler", parents=[common], help="Block error rate of RM decoders")
    bler.add_argument("--m", type=int, required=True)
    bler.add_argument("--r", type=int, required=True)
    bler.add_argument("--decoder", choices=["map", "projective", "both"], default="both")
    bler.add_argument("--eps", default="0:0.6:61", help="Erasure grid start:stop:count")
    bler.add_argument("--n-max", type=int, default=None)

    asym = sub.add_parser("asymptotic", parents=[common], help="n T_avg at the fixed rate R*")
    asym.add_argument("--n", type=_int_list, default=[])
    asym.add_argument("--rm-max-n", type=int, default=0, help="Include rm-map up to this length")
    asym.add_argument("--max-evaluations", type=int, default=None)

    stab = sub.add_parser("stability", parents=[common], help="Condition-number study")
    stab.add_argument("--code", default="rm", choices=["rm", "mds", "random", "polar"])
    stab.add_argument("--m", type=int, default=None)
    stab.add_argument("--r", type=int, default=None)
    stab.add_argument("--n", type=_int_list, default=[])
    stab.add_argument("--k", type=int, default=None)
    stab.add_argument("--sub-k", type=int, default=None)
    stab.add_argument("--eps", default=None, help="Erasure grid start:stop:count")
    stab.add_argument("--patterns", type=int, default=1000, dest="patterns_per_eps")
    stab.add_argument("--n-max", type=int, default=None)

    sim = sub.add_parser("simulate", parents=[common], help="Straggler simulation")
    sim.add_argument("--scheme", required=True, choices=["uncoded", "mds", "rm", "rm-map", "rm-projective", "polar-sc", "random"])
    sim.add_argument("--n", type=_int_list, default=[])
    sim.add_argument("--k", type=int, default=None)
    sim.add_argument("--m", type=int, default=None)
    sim.add_argument("--r", type=int, default=None)
    sim.add_argument("--jobs", type=int, default=None)
    sim.add_argument("--payload", default=None, help="Matrix product shape rows x inner x cols")
    sim.add_argument("--n-max", type=int, default=None)

    return parser


_GLOBAL_ARGS = {"template", "log_level", "workers"}


def experiment_from_args(args: argparse.Namespace, config: CodedCompConfig) -> ExperimentConfig:
    values: Dict[str, Any] = {k: v for k, v in vars(args).items() if k not in _GLOBAL_ARGS and v is not None}
    values.setdefault("seed", config.seed)
    values.setdefault("trials", config.mc_trials)
    if values.get("dist") == "weibull":
        values.setdefault("alpha", 2.0)
    return ExperimentConfig(**values)


def load_config(args: argparse.Namespace) -> CodedCompConfig:
    config = CodedCompConfig.load_template(args.template) if args.template else CodedCompConfig.from_env()
    if args.workers is not None:
        config.workers = args.workers
    if args.log_level:
        config.log_level = args.log_level.upper()
    config.validate()
    return config


def cmd_analyze(exp: ExperimentConfig, orchestrator: ExperimentOrchestrator) -> RunOutput:
    return orchestrator.run_analyze(exp)


def cmd_bler(exp: ExperimentConfig, orchestrator: ExperimentOrchestrator) -> RunOutput:
    return orchestrator.run_bler(exp)


def cmd_asymptotic(exp: ExperimentConfig, orchestrator: ExperimentOrchestrator) -> RunOutput:
    return orchestrator.run_asymptotic(exp)


def cmd_stability(exp: ExperimentConfig, orchestrator: ExperimentOrchestrator) -> RunOutput:
    return orchestrator.run_stability(exp)


def cmd_simulate(exp: ExperimentConfig, orchestrator: ExperimentOrchestrator) -> RunOutput:
    return orchestrator.run_simulate(exp)


COMMANDS = {
    "analyze": cmd_analyze,
    "bler": cmd_bler,
    "asymptotic": cmd_asymptotic,
    "stability": cmd_stability,
    "simulate": cmd_simulate,
}


def render(exp: ExperimentConfig, output: RunOutput) -> str:
    echoed = exp.model_dump(exclude={"output"})
    if exp.format == "json":
        return render_json({**output.summary, "header": output.header, "partial": output.partial}, echoed)
    return render_csv(output.records, echoed, output.columns, output.header)


def emit(exp: ExperimentConfig, text: str) -> Optional[Path]:
    if exp.output:
        return write_text(exp.output, text)
    sys.stdout.write(text)
    sys.stdout.flush()
    return None


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Entry point; returns the process exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)

    try:
        config = load_config(args)
        setup_logging(config)
        exp = experiment_from_args(args, config)
        orchestrator = ExperimentOrchestrator(config)
        output = COMMANDS[exp.command](exp, orchestrator)
        emit(exp, render(exp, output))
        if output.partial:
            logger.warning("output is partial: the evaluation budget was exhausted")
            return EXIT_NUMERIC
        return EXIT_OK
    except ValidationError as e:
        logger.error(f"Invalid arguments: {e}")
        return EXIT_USAGE
    except CodedCompError as e:
        logger.error(f"{type(e).__name__}: {e}")
        return e.exit_code
    except (ValueError, FileNotFoundError) as e:
        logger.error(f"Invalid input: {e}")
        return EXIT_USAGE
    except Exception as e:
        logger.exception(f"Unexpected failure: {e}")
        return EXIT_INTERNAL


def run() -> None:
    sys.exit(main())


if __name__ == "__main__":
    run()
