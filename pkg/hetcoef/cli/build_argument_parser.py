import argparse

import hetcoef
from hetcoef.data_layer.basis_models.basis_spec import BasisSpec
from hetcoef.system.logging.configure_logging import LogLevel

CONTROL_FROM_COLUMN = "column"
CONTROL_FROM_DISCRETE_Z = "discrete-z"
STUDY_RUN = "run"
STUDY_APPROXIMATION = "approximation"


def basis_flag(flag: str) -> BasisSpec:
    try:
        return BasisSpec.from_flag(flag)
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"invalid basis {flag!r}: {e}") from e


def non_negative_float(value: str) -> float:
    number = float(value)
    if number < 0:
        raise argparse.ArgumentTypeError(f"must be non-negative, got {value}")
    return number


def positive_int(value: str) -> int:
    number = int(value)
    if number < 1:
        raise argparse.ArgumentTypeError(f"must be a positive integer, got {value}")
    return number


def seed_value(value: str) -> int:
    number = int(value)
    if not 0 <= number < 2**64:
        raise argparse.ArgumentTypeError(f"seed must be a 64-bit unsigned integer, got {value}")
    return number


def build_argument_parser() -> argparse.ArgumentParser:
    common_parser = argparse.ArgumentParser(add_help=False)
    common_parser.add_argument(
        "--threads", type=positive_int, default=None, help="Worker cap (falls back to HETCOEF_THREADS, then 1)"
    )
    common_parser.add_argument(
        "--log-level",
        default="INFO",
        choices=[level.name for level in LogLevel if level != LogLevel.CRITICAL],
        help="Console/file log level",
    )

    parser = argparse.ArgumentParser(
        prog=hetcoef.__package_name__,
        description=hetcoef.__description__,
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {hetcoef.__version__}")
    subparsers = parser.add_subparsers(dest="subcommand", required=True)

    simulate_parser = subparsers.add_parser("simulate", parents=[common_parser], help="Draw a synthetic dataset")
    simulate_parser.add_argument("--config", required=True, help="DgpConfig as .json or .toml")
    simulate_parser.add_argument("--n", type=positive_int, required=True, help="Sample size")
    simulate_parser.add_argument("--seed", type=seed_value, default=None, help="Overrides the config seed")
    simulate_parser.add_argument("--out", required=True, help="Dataset csv (ground truth json is written next to it)")

    control_parser = subparsers.add_parser(
        "control", parents=[common_parser], help="Append v = F_{X|Z}(X|Z) estimated within instrument cells"
    )
    control_parser.add_argument("--data", required=True, help="Dataset csv with x and z columns")
    control_parser.add_argument("--out", required=True, help="Dataset csv with the v column appended")

    estimate_parser = subparsers.add_parser("estimate", parents=[common_parser], help="Fit the control regression")
    estimate_parser.add_argument("--data", required=True, help="Dataset csv")
    estimate_parser.add_argument("--p", type=basis_flag, required=True, help="p(x) basis, kind:dim[:lower:upper]")
    estimate_parser.add_argument("--psi", type=basis_flag, required=True, help="psi(v) basis, kind:dim[:lower:upper]")
    estimate_parser.add_argument("--ridge", type=non_negative_float, default=0.0, help="Ridge penalty (default 0)")
    add_control_argument(estimate_parser)
    estimate_parser.add_argument("--out", required=True, help="Fitted model json")
    estimate_parser.add_argument("--asf-grid", default=None, help="ASF grid csv (default: next to --out)")
    estimate_parser.add_argument("--grid-points", type=positive_int, default=11, help="ASF grid size for scalar x")

    diagnose_parser = subparsers.add_parser(
        "diagnose", parents=[common_parser], help="Evaluate identification conditions on a dataset"
    )
    diagnose_parser.add_argument("--data", required=True, help="Dataset csv")
    diagnose_parser.add_argument("--p", type=basis_flag, required=True, help="p(x) basis, kind:dim[:lower:upper]")
    diagnose_parser.add_argument("--bins", type=positive_int, default=10, help="Number of quantile bins of v")
    add_control_argument(diagnose_parser)
    diagnose_parser.add_argument(
        "--mutually-exclusive", action="store_true", help="Validate treatment columns as exclusive dummies"
    )
    diagnose_parser.add_argument("--out", required=True, help="Diagnostics report json")
    diagnose_parser.add_argument("--profile", default=None, help="Per-bin eigenvalue csv (default: next to --out)")

    mc_parser = subparsers.add_parser("mc", parents=[common_parser], help="Monte Carlo replication study")
    mc_parser.add_argument("--config", required=True, help="McConfig as .json or .toml")
    mc_parser.add_argument("--study", choices=[STUDY_RUN, STUDY_APPROXIMATION], default=STUDY_RUN)
    mc_parser.add_argument("--out-csv", required=True, help="One row per (n, K, target) cell")
    mc_parser.add_argument("--out-json", required=True, help="Report json")
    mc_parser.add_argument("--progress", action="store_true", help="Show a tqdm progress bar on stderr")

    return parser


def add_control_argument(subparser: argparse.ArgumentParser) -> None:
    subparser.add_argument(
        "--control",
        choices=[CONTROL_FROM_COLUMN, CONTROL_FROM_DISCRETE_Z],
        default=CONTROL_FROM_COLUMN,
        help="Use the observed v column, or estimate v within discrete instrument cells",
    )
