# __main__.py
import logging
import sys
from multiprocessing import freeze_support
from typing import List, Optional

from hetcoef.cli.build_argument_parser import build_argument_parser
from hetcoef.cli.run_subcommands import SUBCOMMAND_RUNNERS
from hetcoef.system.logging.configure_logging import set_log_level
from hetcoef.utilities.identification_failure_exception import IdentificationFailureError

logger = logging.getLogger(__name__)

EXIT_SUCCESS = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2
EXIT_IDENTIFICATION_FAILURE = 3


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_argument_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        # argparse exits 2 on usage errors and 0 for --help / --version
        return e.code if isinstance(e.code, int) else EXIT_USAGE

    set_log_level(args.log_level)
    try:
        SUBCOMMAND_RUNNERS[args.subcommand](args)
    except IdentificationFailureError as e:
        logger.debug("Identification failure", exc_info=True)
        print(f"hetcoef {args.subcommand}: identification failure: {e}", file=sys.stderr)
        return EXIT_IDENTIFICATION_FAILURE
    except (OSError, ValueError) as e:
        logger.debug("Subcommand failed", exc_info=True)
        print(f"hetcoef {args.subcommand}: error: {e}", file=sys.stderr)
        return EXIT_FAILURE
    return EXIT_SUCCESS


if __name__ == "__main__":
    freeze_support()
    sys.exit(main())
