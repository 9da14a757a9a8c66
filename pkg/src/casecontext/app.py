"""
CaseContext - Command-line entry point

Runs the retrieval pipeline stage by stage over a single config file.
Every stage writes its artifacts into a workspace directory and records a
manifest line so later stages (and reruns) can pick up from there.
"""
import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

from dotenv import load_dotenv

from casecontext.corpus.synthetic import write_synthetic_corpus
from casecontext.errors import CaseContextError
from casecontext.pipeline.config import load_config, validate_config
from casecontext.pipeline.stages import STAGES, run_all, run_stage

logger = logging.getLogger("casecontext")

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


def build_parser() -> argparse.ArgumentParser:
    """
    Build the argument parser.

    Returns:
        argparse.ArgumentParser: Parser for ``reakase <command>``.
    """
    parser = argparse.ArgumentParser(
        prog="reakase",
        description="Legal case retrieval with knowledge- and reasoning-augmented case contexts."
    )
    parser.add_argument("--log-level", default="INFO", choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    commands = parser.add_subparsers(dest="command", required=True)

    for name in (*STAGES, "all"):
        command = commands.add_parser(name, help=f"run stage '{name}'" if name != "all" else "run every stage in order")
        command.add_argument("--config", required=True, type=Path)
        command.add_argument("--workspace", type=Path, default=Path("workspace"))
        command.add_argument("--seed", type=int, default=None, help="restrict seeded stages to one seed")
        command.add_argument("--force", action="store_true", help="run even when the stage is up to date")

    validate = commands.add_parser("validate", help="validate a config and print it with defaults filled")
    validate.add_argument("--config", required=True, type=Path)

    synth = commands.add_parser("synth", help="write the bundled synthetic corpus")
    synth.add_argument("--out", required=True, type=Path)
    synth.add_argument("--topics", type=int, default=6)
    synth.add_argument("--per-topic", type=int, default=10)
    synth.add_argument("--queries-per-topic", type=int, default=2)
    synth.add_argument("--seed", type=int, default=13)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """
    Main application entry point.

    Returns:
        int: Exit status; 2 for config errors, 3 for missing upstream
            artifacts, 4 for any other failure.
    """
    load_dotenv()
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=getattr(logging, args.log_level), format=LOG_FORMAT)

    try:
        if args.command == "validate":
            _, normalized = validate_config(args.config)
            print(normalized, end="")

        elif args.command == "synth":
            qrels = write_synthetic_corpus(args.out, args.topics, args.per_topic, args.queries_per_topic, args.seed)
            logger.info("Synthetic corpus with %d queries written to %s", len(qrels.queries()), args.out)

        elif args.command == "all":
            run_all(load_config(args.config), args.workspace, args.seed, args.force)

        else:
            run_stage(args.command, load_config(args.config), args.workspace, args.seed, args.force)

    except CaseContextError as e:
        logger.error("%s", e)
        return e.exit_code
    except Exception:
        logger.exception("Unexpected failure")
        return 4
    return 0


if __name__ == "__main__":
    sys.exit(main())
