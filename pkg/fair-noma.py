"""The command-line front end of fair-noma."""
from __future__ import annotations
import argparse
import contextlib
import csv
import json
import logging
import math
import multiprocessing
import os
import sys
import numpy as np
import yaml
import ergodic_analysis
import monte_carlo
import validation
from collections.abc import Callable, Iterator
from dataclasses import dataclass
from typing import Any, Optional, TextIO
from rich.console import Console
from rich.logging import RichHandler
from rich.table import Table
from config import ConfigError, Configuration, load_config
from model import (ChannelPair, ConvergenceError, DomainError, ErgodicEstimate, Method, PolicyKind, Quantity,
                   ResultRow, SystemParams, row_from_estimate)
from monte_carlo import AllocationPolicy
from noma_core import capacity_report, fair_region, is_fair, noma_capacities, sic_margin
from timer import Timer
EDGE_FUNCTION_TYPE = Callable[[SystemParams, ergodic_analysis.QuadratureConfig], ErgodicEstimate]

logger = logging.getLogger(__name__)

with open(os.path.join(os.path.dirname(os.path.abspath(__file__)), "versioning.yml")) as version_file:
    versioning_info = yaml.safe_load(version_file)

__version__ = versioning_info["fair_noma_version"]

ROW_FIELDS = ["sweep_value", "quantity", "method", "value", "error_bound"]
VALIDATION_SAMPLES = 10_000_000
SNR_SWEEP_DEFAULTS = (0.0, 40.0, 41)
ALPHA_SWEEP_DEFAULTS = (0.02, 0.98, 49)


def logging_configurer(level: int, filename: Optional[str]) -> None:
    """
    Configure the logger.

    :param level: The logging level. Either `logging.INFO` or `logging.DEBUG`.
    :param filename: The filename to write the logs to. If it is `None` then the logs aren't written to a file.
    """
    console_handler = RichHandler(console=Console(stderr=True))
    console_formatter = logging.Formatter("%(message)s")
    console_handler.setFormatter(console_formatter)
    console_handler.setLevel(level)
    all_handlers: list[logging.Handler] = [console_handler]

    if filename:
        file_handler = logging.FileHandler(filename, delay=True)
        FORMAT = "%(asctime)s %(name)s (%(filename)s:%(lineno)d) %(levelname)s %(message)s"
        file_formatter = logging.Formatter(FORMAT)
        file_handler.setFormatter(file_formatter)
        file_handler.setLevel(level)
        all_handlers.append(file_handler)

    logging.basicConfig(level=logging.DEBUG,
                        handlers=all_handlers,
                        force=True)


def check_python_version() -> None:
    """Raise an exception if this Python is older than the minimum supported version."""
    def version_numeric(version_str: str) -> list[int]:
        return [int(n) for n in version_str.split(".")]

    python_good_version = version_numeric(versioning_info["minimum_python_version"])
    this_python_version = list(sys.version_info[0:2])

    def version_str(version: list[int]) -> str:
        return f"Python {'.'.join(str(n) for n in version)}"

    if this_python_version < python_good_version:
        raise RuntimeError(f"A newer version of Python is required to run fair-noma. You are currently running "
                           f"{version_str(this_python_version)}. Please upgrade to {version_str(python_good_version)} "
                           "or newer.")


@dataclass(frozen=True)
class SweepSpec:
    """What a sweep varies, over which grid, and how each point is computed."""

    variable: str
    """Either `snr_db` or `alpha`."""
    start: float
    stop: float
    steps: int
    beta: float
    methods: frozenset[Method]
    snr_db: Optional[float] = None
    """The fixed transmit SNR of an alpha sweep."""
    pair: Optional[ChannelPair] = None
    """The fixed channel pair of a closed-form alpha sweep."""
    policies: tuple[AllocationPolicy, ...] = ()
    """The allocation policies of the Monte Carlo rows of an SNR sweep."""

    def __post_init__(self) -> None:
        """Check the grid and the choice of methods."""
        if self.variable not in ("snr_db", "alpha"):
            raise DomainError(f"Unknown sweep variable {self.variable}.")
        if not (math.isfinite(self.start) and math.isfinite(self.stop) and self.start < self.stop):
            raise DomainError(f"`--start` must be smaller than `--stop`, got {self.start} and {self.stop}.")
        if self.steps < 2:
            raise DomainError(f"`--steps` must be at least 2, got {self.steps}.")
        if not self.methods:
            raise DomainError("`--methods` must name at least one method.")
        if self.variable == "alpha":
            if not (0 < self.start and self.stop < 1):
                raise DomainError(f"`--start` and `--stop` of an alpha sweep must lie inside (0, 1), "
                                  f"got {self.start} and {self.stop}.")
            if self.pair is not None and Method.MONTE_CARLO in self.methods:
                raise DomainError("`--gains` fixes the channel pair, so it can't be combined with "
                                  "`--methods monte-carlo`.")
            if self.pair is None and Method.MONTE_CARLO not in self.methods:
                raise DomainError("An alpha sweep needs either `--gains` or `--methods monte-carlo`.")

    def grid(self) -> list[float]:
        """Get the sweep points."""
        return [float(value) for value in np.linspace(self.start, self.stop, self.steps)]


@dataclass(frozen=True)
class McSettings:
    """The Monte Carlo part of a run."""

    samples: int
    seed: int
    config: monte_carlo.McConfig

    @classmethod
    def from_config(cls, config: Configuration) -> McSettings:
        """Read the Monte Carlo settings from the run config."""
        return cls(config.monte_carlo.samples, config.monte_carlo.seed, config.mc_config())


EDGE_QUANTITIES: list[tuple[str, str, Quantity, PolicyKind]] = [
    ("c1_noma_at_inf", "ergodic_c1_noma_at_a_inf", Quantity.C1_NOMA, PolicyKind.AT_INF),
    ("c2_noma_at_sup", "ergodic_c2_noma_at_a_sup", Quantity.C2_NOMA, PolicyKind.AT_SUP),
    ("sum_noma_at_inf", "ergodic_sum_noma_at_a_inf", Quantity.SUM_NOMA, PolicyKind.AT_INF),
    ("sum_noma_at_sup", "ergodic_sum_noma_at_a_sup", Quantity.SUM_NOMA, PolicyKind.AT_SUP),
]
"""The quadrature rows of an SNR sweep: the row name, the function, and its Monte Carlo stand-in."""


def edge_row(snr_db: float, params: SystemParams, name: str, function_name: str, quantity: Quantity,
             kind: PolicyKind, config: Configuration, mc: McSettings) -> ResultRow:
    """
    Get one quadrature row, or its Monte Carlo stand-in if the quadrature doesn't converge.

    :param snr_db: The sweep value.
    :param params: The system parameters at this sweep point.
    :param name: The row name.
    :param function_name: The `ergodic_analysis` function that computes the row.
    :param quantity: The Monte Carlo statistic that replaces it.
    :param kind: The allocation policy that the stand-in uses.
    """
    compute: EDGE_FUNCTION_TYPE = getattr(ergodic_analysis, function_name)
    try:
        return row_from_estimate(snr_db, name, compute(params, config.quadrature_config()))
    except ConvergenceError as error:
        logger.warning(f"{name} at {snr_db:g} dB falls back to Monte Carlo: {error}")
        result = monte_carlo.estimate(params, AllocationPolicy(kind), quantity, mc.samples, mc.seed, mc.config)
        return row_from_estimate(snr_db, name, result, Method.MONTE_CARLO_FALLBACK)


def snr_sweep_rows(spec: SweepSpec, config: Configuration) -> list[ResultRow]:
    """
    Get the rows behind the expected-capacity and sum-gap curves over the transmit SNR.

    :param spec: The SNR grid, the methods and the Monte Carlo policies.
    :param config: The run config.
    """
    mc = McSettings.from_config(config)
    rows = []
    for snr_db in spec.grid():
        params = SystemParams.from_db(snr_db, spec.beta)
        logger.debug(f"Sweep point {snr_db:g} dB (xi={params.xi:g}).")
        if Method.CLOSED_FORM in spec.methods:
            rows.append(row_from_estimate(snr_db, Quantity.C1_OMA.value, ergodic_analysis.ergodic_c1_oma(params)))
            rows.append(row_from_estimate(snr_db, Quantity.C2_OMA.value, ergodic_analysis.ergodic_c2_oma(params)))
            rows.append(row_from_estimate(snr_db, Quantity.SUM_OMA.value, ergodic_analysis.ergodic_sum_oma(params)))
        if Method.QUADRATURE in spec.methods:
            for name, function_name, quantity, kind in EDGE_QUANTITIES:
                rows.append(edge_row(snr_db, params, name, function_name, quantity, kind, config, mc))
        if Method.MONTE_CARLO in spec.methods:
            oma = monte_carlo.estimate_many(params, AllocationPolicy(),
                                            [Quantity.C1_OMA, Quantity.C2_OMA, Quantity.SUM_OMA],
                                            mc.samples, mc.seed, mc.config)
            rows.extend(row_from_estimate(snr_db, quantity.value, result) for quantity, result in oma.items())
            for policy in spec.policies:
                noma = monte_carlo.estimate_many(params, policy,
                                                 [Quantity.C1_NOMA, Quantity.C2_NOMA, Quantity.SUM_NOMA,
                                                  Quantity.SUM_GAP],
                                                 mc.samples, mc.seed, mc.config)
                rows.extend(row_from_estimate(snr_db, f"{quantity.value}:{policy.label}", result)
                            for quantity, result in noma.items())
    return rows


def _marker_row(name: str, value: float, error_bound: float, method: Method) -> ResultRow:
    return ResultRow(value, name, value, error_bound, method.value)


def alpha_sweep_rows(spec: SweepSpec, config: Configuration) -> list[ResultRow]:
    """
    Get the rows behind the capacity trade-off over the power allocation coefficient.

    With a fixed channel pair the capacities are exact. Otherwise they are Monte Carlo expectations and the region
    markers are the averages of the per-pair bounds. Either way the grid also gets the two marker allocations.

    :param spec: The alpha grid, the transmit SNR and either a channel pair or the Monte Carlo method.
    :param config: The run config.
    """
    assert spec.snr_db is not None
    params = SystemParams.from_db(spec.snr_db, spec.beta)
    rows = []
    if spec.pair is not None:
        pair = spec.pair
        region = fair_region(params, pair)
        rows.append(_marker_row("a_inf_marker", region.a_inf, 0.0, Method.CLOSED_FORM))
        rows.append(_marker_row("a_sup_marker", region.a_sup, 0.0, Method.CLOSED_FORM))
        for a in sorted(set(spec.grid()) | {region.a_inf, region.a_sup}):
            c1, c2 = noma_capacities(params, pair, a)
            for name, value in ((Quantity.C1_NOMA, c1), (Quantity.C2_NOMA, c2), (Quantity.SUM_NOMA, c1 + c2)):
                rows.append(ResultRow(a, name.value, value, 0.0, Method.CLOSED_FORM.value))
        return rows

    mc = McSettings.from_config(config)
    a_inf, a_sup = monte_carlo.region_markers(params, mc.samples, mc.seed, mc.config)
    rows.append(_marker_row("a_inf_marker", a_inf.mean, a_inf.std_error, Method.MONTE_CARLO))
    rows.append(_marker_row("a_sup_marker", a_sup.mean, a_sup.std_error, Method.MONTE_CARLO))
    for a in sorted(set(spec.grid()) | {a_inf.mean, a_sup.mean}):
        results = monte_carlo.estimate_many(params, AllocationPolicy.fixed(a),
                                            [Quantity.C1_NOMA, Quantity.C2_NOMA, Quantity.SUM_NOMA],
                                            mc.samples, mc.seed, mc.config)
        rows.extend(row_from_estimate(a, quantity.value, result) for quantity, result in results.items())
    return rows


@contextlib.contextmanager
def open_sink(path: str) -> Iterator[TextIO]:
    """Open the output file, or use stdout for `-`."""
    if path == "-":
        yield sys.stdout
    else:
        with open(path, "w", newline="", encoding="utf-8") as sink:
            yield sink


def _number(value: Any) -> str:
    if value is None:
        return ""
    return f"{value:.6g}" if isinstance(value, float) else str(value)


def print_table(sink: TextIO, title: str, columns: list[str], lines: list[list[Any]]) -> None:
    """Print an aligned table."""
    table = Table(title=title)
    for column in columns:
        table.add_column(column)
    for line in lines:
        table.add_row(*(_number(value) for value in line))
    Console(file=sink, width=160).print(table)


def write_rows(rows: list[ResultRow], output_format: str, sink: TextIO) -> None:
    """
    Write result rows in ascending sweep_value order.

    :param rows: The rows. Rows with the same sweep value keep their order.
    :param output_format: `csv`, `json` or `text`.
    :param sink: Where to write.
    """
    rows = sorted(rows, key=lambda row: row.sweep_value)
    for row in rows:
        if not (math.isfinite(row.value) and math.isfinite(row.error_bound)):
            raise ConvergenceError(f"{row.quantity_name} at {row.sweep_value} is not finite.")
    if output_format == "csv":
        writer = csv.DictWriter(sink, fieldnames=ROW_FIELDS)
        writer.writeheader()
        writer.writerows(row.as_dict() for row in rows)
    elif output_format == "json":
        json.dump([row.as_dict() for row in rows], sink, indent=2)
        sink.write("\n")
    else:
        print_table(sink, "Results", ROW_FIELDS,
                    [[row.sweep_value, row.quantity_name, row.method, row.value, row.error_bound] for row in rows])


def region_summary(params: SystemParams, pair: ChannelPair) -> dict[str, Any]:
    """Get the fair region of a pair and all six capacities at both of its edges."""
    region = fair_region(params, pair)
    return {"snr_db": params.snr_db, "beta": params.beta, "g_weak": pair.g_weak, "g_strong": pair.g_strong,
            "a_inf": region.a_inf, "a_sup": region.a_sup,
            "at_a_inf": capacity_report(params, pair, region.a_inf).as_dict(),
            "at_a_sup": capacity_report(params, pair, region.a_sup).as_dict()}


def capacity_summary(params: SystemParams, pair: ChannelPair, a: float) -> dict[str, Any]:
    """Get the capacities of a pair at one allocation, whether it is fair, and the SIC margin."""
    region = fair_region(params, pair)
    return {"snr_db": params.snr_db, "beta": params.beta, "g_weak": pair.g_weak, "g_strong": pair.g_strong,
            **capacity_report(params, pair, a).as_dict(),
            "a_inf": region.a_inf, "a_sup": region.a_sup, "fair": is_fair(params, pair, a),
            "sic_margin": sic_margin(params, pair, a)}


def write_summary(summary: dict[str, Any], output_format: str, sink: TextIO, title: str) -> None:
    """Write a single-point result as JSON or as aligned text."""
    if output_format == "json":
        json.dump(summary, sink, indent=2)
        sink.write("\n")
        return
    scalars = [[key, value] for key, value in summary.items() if not isinstance(value, dict)]
    print_table(sink, title, ["quantity", "value"], scalars)
    edges = [key for key, value in summary.items() if isinstance(value, dict)]
    if edges:
        names = list(summary[edges[0]])
        print_table(sink, "Capacities at the region edges (bits/s/Hz)", ["quantity", *edges],
                    [[name, *(summary[edge][name] for edge in edges)] for name in names])


def cmd_region(args: argparse.Namespace, config: Configuration) -> int:
    """Print the fair region of one channel pair."""
    params = SystemParams.from_db(args.snr_db, config.system.beta)
    summary = region_summary(params, ChannelPair(*args.gains))
    with open_sink(config.output.path) as sink:
        write_summary(summary, config.output.format, sink, "Fair region")
    return 0


def cmd_capacity(args: argparse.Namespace, config: Configuration) -> int:
    """Print the capacities of one channel pair at one allocation."""
    if not (0 < args.alpha < 1):
        raise DomainError(f"`--alpha` must be in (0, 1), got {args.alpha}.")
    params = SystemParams.from_db(args.snr_db, config.system.beta)
    summary = capacity_summary(params, ChannelPair(*args.gains), args.alpha)
    with open_sink(config.output.path) as sink:
        write_summary(summary, config.output.format, sink, "Capacities")
    return 0


def _policies(args: argparse.Namespace) -> tuple[AllocationPolicy, ...]:
    policies = []
    for name in args.policy or [PolicyKind.MIDPOINT.value]:
        kind = PolicyKind(name)
        if kind == PolicyKind.FIXED:
            if args.alpha is None:
                raise DomainError("`--policy fixed` needs `--alpha`.")
            policies.append(AllocationPolicy.fixed(args.alpha))
        else:
            policies.append(AllocationPolicy(kind))
    return tuple(dict.fromkeys(policies))


def cmd_sweep_snr(args: argparse.Namespace, config: Configuration) -> int:
    """Sweep the transmit SNR."""
    start, stop, steps = SNR_SWEEP_DEFAULTS
    methods = args.methods or frozenset({Method.CLOSED_FORM, Method.QUADRATURE})
    spec = SweepSpec("snr_db", _pick(args.start, start), _pick(args.stop, stop), _pick(args.steps, steps),
                     config.system.beta, methods, policies=_policies(args))
    rows = snr_sweep_rows(spec, config)
    with open_sink(config.output.path) as sink:
        write_rows(rows, config.output.format, sink)
    return 0


def cmd_sweep_alpha(args: argparse.Namespace, config: Configuration) -> int:
    """Sweep the power allocation coefficient."""
    start, stop, steps = ALPHA_SWEEP_DEFAULTS
    pair = ChannelPair(*args.gains) if args.gains else None
    default_methods = frozenset({Method.CLOSED_FORM if pair else Method.MONTE_CARLO})
    spec = SweepSpec("alpha", _pick(args.start, start), _pick(args.stop, stop), _pick(args.steps, steps),
                     config.system.beta, args.methods or default_methods, snr_db=_pick(args.snr_db, 30.0), pair=pair)
    rows = alpha_sweep_rows(spec, config)
    with open_sink(config.output.path) as sink:
        write_rows(rows, config.output.format, sink)
    return 0


def cmd_validate(args: argparse.Namespace, config: Configuration) -> int:
    """Run every cross-method check and report the deltas."""
    settings = validation.ValidationSettings(params=SystemParams.from_db(_pick(args.snr_db, 10.0), config.system.beta),
                                             samples=config.monte_carlo.samples, seed=config.monte_carlo.seed,
                                             quadrature=config.quadrature_config(), monte_carlo=config.mc_config())
    checks = validation.run_checks(settings)
    columns = ["name", "reference", "estimate", "delta", "tolerance", "std_error", "passed"]
    with open_sink(config.output.path) as sink:
        if config.output.format == "json":
            json.dump([check.as_dict() for check in checks], sink, indent=2)
            sink.write("\n")
        elif config.output.format == "csv":
            writer = csv.DictWriter(sink, fieldnames=columns)
            writer.writeheader()
            writer.writerows(check.as_dict() for check in checks)
        else:
            print_table(sink, "Validation", columns,
                        [[check.name, check.reference, check.estimate, check.delta, check.tolerance,
                          "" if check.std_error is None else check.std_error, "yes" if check.passed else "NO"]
                         for check in checks])
    if not validation.all_passed(checks):
        failed = [check.name for check in checks if not check.passed]
        logger.error(f"{len(failed)} of {len(checks)} checks failed: {', '.join(failed)}")
        return 1
    logger.info(f"All {len(checks)} checks passed.")
    return 0


def _pick(value: Any, default: Any) -> Any:
    return default if value is None else value


def parse_gains(text: str) -> tuple[float, float]:
    """Read `g1,g2` into two positive gains."""
    try:
        gains = tuple(float(part) for part in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected two numbers as g1,g2, got {text!r}")
    if len(gains) != 2:
        raise argparse.ArgumentTypeError(f"expected two numbers as g1,g2, got {text!r}")
    if not all(math.isfinite(gain) and gain > 0 for gain in gains):
        raise argparse.ArgumentTypeError(f"both gains must be positive, got {text!r}")
    return gains[0], gains[1]


def parse_methods(text: str) -> frozenset[Method]:
    """Read a comma-separated list of methods."""
    choices = [Method.CLOSED_FORM.value, Method.QUADRATURE.value, Method.MONTE_CARLO.value]
    names = [name.strip() for name in text.split(",") if name.strip()]
    unknown = [name for name in names if name not in choices]
    if unknown or not names:
        raise argparse.ArgumentTypeError(f"choose from {choices}, got {text!r}")
    return frozenset(Method(name) for name in names)


def build_parser() -> argparse.ArgumentParser:
    """Build the parser of every subcommand."""
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-v", action="store_true", help="Make output more verbose. Include per-block timings.")
    common.add_argument("-l", "--logfile", help="Record all console output to a log file.", default=None)
    common.add_argument("--beta", type=float, help="The Rayleigh scale, the mean channel gain (defaults to 1).")
    common.add_argument("--out", help="Where to write the results (defaults to stdout).")

    sampling = argparse.ArgumentParser(add_help=False)
    sampling.add_argument("--samples", type=int, help="The number of Monte Carlo channel pairs.")
    sampling.add_argument("--seed", type=int, help="The 64-bit Monte Carlo seed.")
    sampling.add_argument("--workers", type=int, help="The number of Monte Carlo worker processes. "
                                                      "Results don't depend on it.")

    parser = argparse.ArgumentParser(prog="fair-noma", description="Fair power allocation for two-user NOMA")
    parser.add_argument("--version", action="version", version=f"fair-noma {__version__}")
    subparsers = parser.add_subparsers(dest="command", required=True)

    region = subparsers.add_parser("region", parents=[common], help="The fair region of one channel pair.")
    region.add_argument("--gains", type=parse_gains, required=True, help="The two channel gains, g1,g2.")
    region.add_argument("--snr-db", type=float, required=True, help="The transmit SNR in dB.")
    region.add_argument("--format", choices=["json", "text"], default="text")
    region.set_defaults(handler=cmd_region)

    capacity = subparsers.add_parser("capacity", parents=[common], help="The capacities at one allocation.")
    capacity.add_argument("--gains", type=parse_gains, required=True, help="The two channel gains, g1,g2.")
    capacity.add_argument("--snr-db", type=float, required=True, help="The transmit SNR in dB.")
    capacity.add_argument("--alpha", type=float, required=True, help="The power fraction of the strong user.")
    capacity.add_argument("--format", choices=["json", "text"], default="text")
    capacity.set_defaults(handler=cmd_capacity)

    sweep_snr = subparsers.add_parser("sweep-snr", parents=[common, sampling], help="Sweep the transmit SNR.")
    sweep_snr.add_argument("--start", type=float, help="The first SNR in dB (defaults to 0).")
    sweep_snr.add_argument("--stop", type=float, help="The last SNR in dB (defaults to 40).")
    sweep_snr.add_argument("--steps", type=int, help="The number of grid points (defaults to 41).")
    sweep_snr.add_argument("--methods", type=parse_methods,
                           help="Comma-separated methods (defaults to closed-form,quadrature).")
    sweep_snr.add_argument("--policy", action="append", choices=[kind.value for kind in PolicyKind],
                           help="An allocation policy for the Monte Carlo rows. Can be repeated.")
    sweep_snr.add_argument("--alpha", type=float, help="The coefficient of `--policy fixed`.")
    sweep_snr.add_argument("--format", choices=["csv", "json", "text"], default="csv")
    sweep_snr.set_defaults(handler=cmd_sweep_snr)

    sweep_alpha = subparsers.add_parser("sweep-alpha", parents=[common, sampling],
                                        help="Sweep the power allocation coefficient.")
    sweep_alpha.add_argument("--snr-db", type=float, help="The transmit SNR in dB (defaults to 30).")
    sweep_alpha.add_argument("--gains", type=parse_gains, help="Fix the channel pair instead of averaging.")
    sweep_alpha.add_argument("--start", type=float, help="The first coefficient (defaults to 0.02).")
    sweep_alpha.add_argument("--stop", type=float, help="The last coefficient (defaults to 0.98).")
    sweep_alpha.add_argument("--steps", type=int, help="The number of grid points (defaults to 49).")
    sweep_alpha.add_argument("--methods", type=parse_methods,
                             help="closed-form with `--gains`, monte-carlo without (the default).")
    sweep_alpha.add_argument("--format", choices=["csv", "json", "text"], default="csv")
    sweep_alpha.set_defaults(handler=cmd_sweep_alpha)

    validate = subparsers.add_parser("validate", parents=[common, sampling], help="Run every cross-method check.")
    validate.add_argument("--snr-db", type=float, help="The transmit SNR of the checks in dB (defaults to 10).")
    validate.add_argument("--format", choices=["csv", "json", "text"], default="text")
    validate.set_defaults(handler=cmd_validate)
    return parser


def run_config(args: argparse.Namespace) -> Configuration:
    """Turn the flags into the run config."""
    samples = args.samples if "samples" in args else None
    if samples is None and args.command == "validate":
        samples = VALIDATION_SAMPLES
    return load_config({"system": {"beta": args.beta},
                        "monte_carlo": {"samples": samples,
                                        "seed": getattr(args, "seed", None),
                                        "workers": getattr(args, "workers", None)},
                        "output": {"format": args.format, "path": args.out}})


def main(argv: Optional[list[str]] = None) -> int:
    """
    Parse the arguments and run one subcommand.

    Usage errors exit through `argparse` with code 2.

    :return: 0 on success, 1 on a numerical failure or a failed check.
    """
    parser = build_parser()
    args = parser.parse_args(argv)
    logging_configurer(logging.DEBUG if args.v else logging.INFO, args.logfile)
    logger.debug(f"fair-noma {__version__}")
    check_python_version()
    timer = Timer()
    try:
        config = run_config(args)
        exit_code = args.handler(args, config)
    except (DomainError, ConfigError) as error:
        parser.error(str(error))
    except ConvergenceError as error:
        logger.error(f"Numerical failure: {error}")
        exit_code = 1
    logger.debug(f"{args.command} took {timer.time_since_reset():.2f} s.")
    logging.shutdown()
    return exit_code


if __name__ == "__main__":
    multiprocessing.set_start_method('spawn')
    try:
        sys.exit(main())
    except Exception:
        logger.exception("Quitting fair-noma due to an error:")
        sys.exit(1)
