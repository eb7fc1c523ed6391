"""Experiment orchestration: config files in, CSVs and a summary out.

Config format: one INI section per experiment, flat key-value pairs, e.g.

    [gauss-identity]
    kind = identity
    n = 1
    packet1 = 1.0 0.0 1.0 0.0 0.0
    weight = eps
    eps = 1.0
    schedule_start = 0.5
    schedule_factor = 4
    schedule_count = 2
    tolerance = 1e-6
    output = gauss_identity.csv

A packet key lists amplitude_re amplitude_im width center(n) momentum(n).
The optional [lab] section holds the summary path.  Exit status: 0 all
experiments pass, 1 any tolerance failure or runtime error (failing rows
are named), 2 config errors (section and key are named).

CSV rows are deterministic: fixed column order, 17-significant-digit
floats, one row per schedule point, newline-terminated lines.  The
SMOOTHING_LAB_THREADS environment variable caps the experiment-level
thread pool; experiments themselves are pure functions, so parallel and
serial runs emit identical bytes.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import os
import re
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from .errors import ConfigError, SmoothingLabError
from .limits import (verify_asymptotics, verify_corollary, verify_flux,
                     verify_identity, verify_remainder_decay,
                     verify_sandwich, verify_smoothing_bound,
                     verify_theorem_main)
from .model import (QuadraturePlan, VerificationReport, WavePacket,
                    WavePacketSum)
from .weights import constant_weight, make_psi_eps, make_psi_k, rescale

CSV_COLUMNS = [
    "experiment", "n", "datum_id", "weight_id", "schedule_param",
    "lhs", "rhs", "abs_residual", "rel_residual",
    "extrapolated_limit", "limit_error", "pass",
]

# experiment kinds with the statement each one checks
REGISTRY = {
    "identity": (
        "int_{-T}^{T} int [psi''|u_r|^2 + (psi'/r)|grad_tau u|^2"
        " - (1/4)|u|^2 Lap^2 psi] dx dt = (flux(T) - flux(-T)) / 2"
    ),
    "theorem-limit": (
        "lim_{T->inf} int_{-T}^{T} int [psi''|u_r|^2 + (psi'/r)|grad_tau u|^2"
        " - (1/4)|u|^2 Lap^2 psi] dx dt = 2 pi psi'(inf) ||f||^2_{H^1/2}"
    ),
    "corollary-limit": (
        "lim_{R->inf} (1/R) int_t int_{B_R} |u_r|^2 dx dt"
        " = 2 pi ||f||^2_{H^1/2}"
    ),
    "flux-limit": (
        "lim_{t->+-inf} Im int conj(u) psi'(r) u_r dx"
        " = +-2 pi psi'(inf) ||f||^2_{H^1/2}"
    ),
    "sandwich": (
        "(1/R) int_t int_{B_R} |u_r|^2 <= int_t int psi_{k,R}''|u_r|^2"
        " <= ((k+1)/k) profile((k+1)R/k)"
    ),
    "remainder-decay": (
        "lim_{R->inf} int_t int |u|^2 |Lap^2 psi_R| dx dt = 0,"
        " same for int_t int (|grad_tau u|^2/r) |psi_R'|"
    ),
    "asymptotics": (
        "u(t) = e^{-i sgn(t) n pi/4} e^{i|x|^2/(4t)} (4 pi |t|)^{-n/2}"
        " fhat(x/(4 pi t)) + o_{L2}(1)"
    ),
    "smoothing-bound": (
        "sup_R (1/R) int_t int_{B_R} |grad u|^2 dx dt"
        " >= 2 pi ||f||^2_{H^1/2}"
    ),
}

_PACKET_KEY = re.compile(r"^packet(\d+)$")

_BASE_KEYS = {
    "kind", "n", "datum_id", "tolerance", "output",
    "schedule_kind", "schedule_start", "schedule_factor", "schedule_count",
    "rel_tol", "tau_space", "time_nodes", "time_panels", "aliasing_threshold",
}
_WEIGHT_KEYS = {"weight", "eps", "k", "value", "rescale_r"}
_KIND_KEYS = {
    "identity": _WEIGHT_KEYS,
    "theorem-limit": _WEIGHT_KEYS,
    "corollary-limit": set(),
    "flux-limit": _WEIGHT_KEYS,
    "sandwich": {"k", "identity_check"},
    "remainder-decay": _WEIGHT_KEYS,
    "asymptotics": {"final_ratio"},
    "smoothing-bound": {"liminf_fraction"},
}
_NEEDS_WEIGHT = {"identity", "theorem-limit", "flux-limit", "remainder-decay"}
_SCHEDULE_NAME = {
    "identity": "T", "theorem-limit": "T",
    "corollary-limit": "R", "sandwich": "R",
    "remainder-decay": "R", "smoothing-bound": "R",
    "flux-limit": "t", "asymptotics": "t",
}
_DEFAULT_TOLERANCE = {
    "identity": 1e-6, "theorem-limit": 0.02, "corollary-limit": 0.02,
    "flux-limit": 0.02, "sandwich": 1e-3, "remainder-decay": 0.25,
    "asymptotics": 0.1, "smoothing-bound": 0.02,
}


@dataclass
class ExperimentSpec:
    """One validated experiment, ready to run."""

    section: str
    kind: str
    datum: WavePacketSum
    schedule: list
    plan: QuadraturePlan
    tolerance: float
    output: str
    weight: object = None
    k: int = 0
    identity_check: bool = False
    extra_opts: dict = field(default_factory=dict)


class _SectionReader:
    """Typed access to one config section with key-level diagnostics."""

    def __init__(self, section: str, items: dict):
        self.section = section
        self.items = dict(items)

    def error(self, key: str, message: str) -> ConfigError:
        return ConfigError(self.section, key, message)

    def raw(self, key: str, default=None, required: bool = False):
        if key in self.items:
            return self.items[key]
        if required:
            raise self.error(key, "required key is missing")
        return default

    def floatv(self, key: str, default=None, required: bool = False):
        raw = self.raw(key, required=required)
        if raw is None:
            return default
        try:
            return float(raw)
        except ValueError:
            raise self.error(key, f"expected a number, got {raw!r}") from None

    def intv(self, key: str, default=None, required: bool = False):
        raw = self.raw(key, required=required)
        if raw is None:
            return default
        try:
            return int(raw)
        except ValueError:
            raise self.error(key, f"expected an integer, got {raw!r}") from None

    def boolv(self, key: str, default: bool = False) -> bool:
        raw = self.raw(key)
        if raw is None:
            return default
        low = str(raw).strip().lower()
        if low in ("1", "true", "yes", "on"):
            return True
        if low in ("0", "false", "no", "off"):
            return False
        raise self.error(key, f"expected a boolean, got {raw!r}")


def _parse_packets(reader: _SectionReader, n: int) -> WavePacketSum:
    entries = []
    for key, raw in reader.items.items():
        m = _PACKET_KEY.match(key)
        if not m:
            continue
        try:
            nums = [float(tok) for tok in raw.split()]
        except ValueError:
            raise reader.error(key, f"non-numeric packet entry in {raw!r}") from None
        if len(nums) != 3 + 2 * n:
            raise reader.error(
                key,
                f"expected {3 + 2 * n} numbers "
                "(amplitude_re amplitude_im width center momentum), "
                f"got {len(nums)}",
            )
        amp = complex(nums[0], nums[1])
        width = nums[2]
        center = nums[3:3 + n]
        momentum = nums[3 + n:3 + 2 * n]
        try:
            entries.append(
                (int(m.group(1)), WavePacket(amp, width, center, momentum))
            )
        except SmoothingLabError as exc:
            raise reader.error(key, str(exc)) from None
    if not entries:
        raise reader.error("packet1", "experiment defines no packets")
    entries.sort(key=lambda e: e[0])
    return WavePacketSum(n, tuple(p for _, p in entries))


def _parse_weight(reader: _SectionReader):
    kind = reader.raw("weight", required=True).strip().lower()
    try:
        if kind == "eps":
            w = make_psi_eps(reader.floatv("eps", required=True))
        elif kind == "bump":
            w = make_psi_k(reader.intv("k", required=True))
        elif kind == "constant":
            w = constant_weight(reader.floatv("value", 1.0))
        else:
            raise reader.error(
                "weight", f"unknown weight kind {kind!r} (eps|bump|constant)"
            )
    except SmoothingLabError as exc:
        if isinstance(exc, ConfigError):
            raise
        key = "eps" if kind == "eps" else "k" if kind == "bump" else "value"
        raise reader.error(key, str(exc)) from None
    R = reader.floatv("rescale_r")
    if R is not None:
        try:
            w = rescale(w, R)
        except SmoothingLabError as exc:
            raise reader.error("rescale_r", str(exc)) from None
    return w


def _parse_plan(reader: _SectionReader) -> QuadraturePlan:
    kwargs = {}
    for key, cast in (("rel_tol", reader.floatv), ("tau_space", reader.floatv),
                      ("aliasing_threshold", reader.floatv),
                      ("time_nodes", reader.intv), ("time_panels", reader.intv)):
        val = cast(key)
        if val is not None:
            kwargs[key] = val
    try:
        return QuadraturePlan(**kwargs)
    except SmoothingLabError as exc:
        raise reader.error(", ".join(kwargs) or "plan", str(exc)) from None


def _parse_schedule(reader: _SectionReader, kind: str) -> list:
    declared = reader.raw("schedule_kind")
    expected = _SCHEDULE_NAME[kind]
    if declared is not None and declared.strip() != expected:
        raise reader.error(
            "schedule_kind",
            f"{kind} experiments schedule {expected!r}, got {declared!r}",
        )
    start = reader.floatv("schedule_start", required=True)
    count = reader.intv("schedule_count", required=True)
    factor = reader.floatv("schedule_factor", 2.0)
    if start <= 0:
        raise reader.error("schedule_start", "must be positive")
    if count < 1:
        raise reader.error("schedule_count", "must be >= 1")
    if factor <= 1.0 and count > 1:
        raise reader.error("schedule_factor", "must exceed 1 for multi-point schedules")
    return [start * factor**j for j in range(count)]


def parse_experiment(section: str, items: dict) -> ExperimentSpec:
    reader = _SectionReader(section, items)
    kind = reader.raw("kind", required=True).strip()
    if kind not in REGISTRY:
        raise reader.error(
            "kind", f"unknown kind {kind!r}; see list-experiments"
        )
    allowed = _BASE_KEYS | _KIND_KEYS[kind]
    for key in reader.items:
        if key not in allowed and not _PACKET_KEY.match(key):
            raise reader.error(key, f"unknown key for kind {kind!r}")

    n = reader.intv("n", required=True)
    if n not in (1, 2, 3):
        raise reader.error("n", f"dimension must be 1, 2 or 3, got {n}")
    datum = _parse_packets(reader, n)
    plan = _parse_plan(reader)
    schedule = _parse_schedule(reader, kind)
    tolerance = reader.floatv("tolerance", _DEFAULT_TOLERANCE[kind])
    if tolerance <= 0:
        raise reader.error("tolerance", "must be positive")
    output = reader.raw("output", f"{section}.csv")

    spec = ExperimentSpec(
        section=section, kind=kind, datum=datum, schedule=schedule,
        plan=plan, tolerance=tolerance, output=output,
    )
    spec.extra_opts["datum_id"] = reader.raw("datum_id", section)
    if kind in _NEEDS_WEIGHT:
        spec.weight = _parse_weight(reader)
    if kind == "sandwich":
        k = reader.intv("k", required=True)
        if k < 1:
            raise reader.error("k", "plateau index must be >= 1")
        spec.k = k
        spec.identity_check = reader.boolv("identity_check", False)
    if kind == "asymptotics":
        spec.extra_opts["final_ratio"] = tolerance
    if kind == "smoothing-bound":
        frac = reader.floatv("liminf_fraction", 0.9)
        if not 0.0 < frac < 1.0:
            raise reader.error("liminf_fraction", "must lie in (0, 1)")
        spec.extra_opts["liminf_fraction"] = frac
    return spec


def run_experiment(spec: ExperimentSpec) -> VerificationReport:
    did = spec.extra_opts["datum_id"]
    if spec.kind == "identity":
        return verify_identity(spec.datum, spec.weight, spec.schedule,
                               spec.plan, spec.tolerance, datum_id=did)
    if spec.kind == "theorem-limit":
        return verify_theorem_main(spec.datum, spec.weight, spec.schedule,
                                   spec.plan, spec.tolerance, datum_id=did)
    if spec.kind == "corollary-limit":
        return verify_corollary(spec.datum, spec.schedule, spec.plan,
                                spec.tolerance, datum_id=did)
    if spec.kind == "flux-limit":
        return verify_flux(spec.datum, spec.weight, spec.schedule, spec.plan,
                           spec.tolerance, datum_id=did)
    if spec.kind == "sandwich":
        return verify_sandwich(spec.datum, spec.k, spec.schedule, spec.plan,
                               spec.tolerance, datum_id=did,
                               identity_check=spec.identity_check)
    if spec.kind == "remainder-decay":
        return verify_remainder_decay(spec.datum, spec.weight, spec.schedule,
                                      spec.plan, decay_ratio=spec.tolerance,
                                      datum_id=did)
    if spec.kind == "asymptotics":
        return verify_asymptotics(spec.datum, spec.schedule, spec.plan,
                                  final_ratio=spec.extra_opts["final_ratio"],
                                  datum_id=did)
    if spec.kind == "smoothing-bound":
        return verify_smoothing_bound(
            spec.datum, spec.schedule, spec.plan, spec.tolerance,
            liminf_fraction=spec.extra_opts["liminf_fraction"], datum_id=did)
    raise ConfigError(spec.section, "kind", f"unhandled kind {spec.kind!r}")


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------

def _fmt(x: float) -> str:
    return "%.17g" % float(x)


def _row_passes(report: VerificationReport, idx: int) -> bool:
    if report.experiment == "identity":
        return bool(report.rel_residual[idx] <= report.tolerance)
    return report.passed


def write_report_csv(report: VerificationReport, path: str) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for i, p in enumerate(report.params):
            writer.writerow([
                report.experiment,
                str(report.n),
                report.datum_id,
                report.weight_id,
                _fmt(p),
                _fmt(report.lhs[i]),
                _fmt(report.rhs[i]),
                _fmt(report.abs_residual[i]),
                _fmt(report.rel_residual[i]),
                _fmt(report.extrapolated_limit),
                _fmt(report.limit_error),
                "1" if _row_passes(report, i) else "0",
            ])


def _empty_csv(path: str) -> None:
    with open(path, "w", newline="") as fh:
        csv.writer(fh, lineterminator="\n").writerow(CSV_COLUMNS)


def _thread_count() -> int:
    raw = os.environ.get("SMOOTHING_LAB_THREADS")
    if raw is None:
        return os.cpu_count() or 1
    try:
        cap = int(raw)
    except ValueError:
        raise ConfigError("environment", "SMOOTHING_LAB_THREADS",
                          f"expected an integer, got {raw!r}") from None
    if cap < 1:
        raise ConfigError("environment", "SMOOTHING_LAB_THREADS",
                          "must be >= 1")
    return cap


def load_config(path: str) -> tuple[list[ExperimentSpec], str]:
    """Parse and validate a config file; returns (specs, summary_path)."""
    parser = configparser.ConfigParser(interpolation=None)
    try:
        with open(path) as fh:
            parser.read_file(fh)
    except OSError as exc:
        raise ConfigError("-", "-", f"cannot read config: {exc}") from None
    except configparser.Error as exc:
        raise ConfigError("-", "-", f"malformed config: {exc}") from None

    summary_path = "summary.txt"
    specs = []
    for section in parser.sections():
        items = dict(parser.items(section))
        if section == "lab":
            for key in items:
                if key != "summary":
                    raise ConfigError("lab", key, "unknown key in [lab]")
            summary_path = items.get("summary", summary_path)
            continue
        specs.append(parse_experiment(section, items))
    return specs, summary_path


def run(config_path: str) -> int:
    """Execute a config: one CSV per experiment, a summary file, exit code."""
    try:
        specs, summary_path = load_config(config_path)
        threads = _thread_count()
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2

    results: dict[str, object] = {}
    if specs:
        with ThreadPoolExecutor(max_workers=min(threads, len(specs))) as pool:
            futures = {spec.section: pool.submit(run_experiment, spec)
                       for spec in specs}
        for spec in specs:
            try:
                results[spec.section] = futures[spec.section].result()
            except SmoothingLabError as exc:
                results[spec.section] = exc

    lines = []
    all_ok = True
    for spec in specs:
        outcome = results[spec.section]
        if isinstance(outcome, VerificationReport):
            write_report_csv(outcome, spec.output)
            verdict = "PASS" if outcome.passed else "FAIL"
            lines.append(
                f"{verdict} [{spec.section}] kind={spec.kind} "
                f"datum={outcome.datum_id} weight={outcome.weight_id} "
                f"-> {spec.output}"
                + (f" ({outcome.notes})" if outcome.notes else "")
            )
            if not outcome.passed:
                all_ok = False
                for i, p in enumerate(outcome.params):
                    if not _row_passes(outcome, i):
                        lines.append(
                            f"    failing row: {spec.section} "
                            f"param={_fmt(p)} lhs={_fmt(outcome.lhs[i])} "
                            f"rhs={_fmt(outcome.rhs[i])} "
                            f"rel_residual={_fmt(outcome.rel_residual[i])}"
                        )
        else:
            _empty_csv(spec.output)
            lines.append(f"ERROR [{spec.section}] kind={spec.kind}: {outcome}")
            all_ok = False

    n_pass = sum(
        1 for s in specs
        if isinstance(results[s.section], VerificationReport)
        and results[s.section].passed
    )
    lines.append(f"{n_pass}/{len(specs)} experiments passed")
    summary = "\n".join(lines) + "\n"
    with open(summary_path, "w") as fh:
        fh.write(summary)
    print(summary, end="")
    return 0 if all_ok else 1


DEFAULT_CONFIG = """\
# smoothing-lab experiment file.  One section per experiment; run with
#   smoothing-lab run <this file>
# Packet rows: amplitude_re amplitude_im width center(n) momentum(n).

[gauss-identity]
kind = identity
n = 1
packet1 = 1.0 0.0 1.0 0.0 0.0
weight = eps
eps = 1.0
schedule_start = 0.5
schedule_factor = 4
schedule_count = 2
tolerance = 1e-6
output = gauss_identity.csv

[gauss-corollary]
kind = corollary-limit
n = 1
packet1 = 1.0 0.0 1.0 0.0 0.0
schedule_start = 4
schedule_factor = 2
schedule_count = 6
tolerance = 0.02
output = gauss_corollary.csv

[gauss-flux]
kind = flux-limit
n = 1
packet1 = 1.0 0.0 1.0 0.0 0.0
weight = eps
eps = 1.0
schedule_start = 8
schedule_factor = 2
schedule_count = 4
tolerance = 0.02
output = gauss_flux.csv
"""


def emit_default_config(path: str) -> None:
    with open(path, "w") as fh:
        fh.write(DEFAULT_CONFIG)


def list_experiments() -> str:
    width = max(len(k) for k in REGISTRY)
    lines = [f"{kind.ljust(width)}  {formula}" for kind, formula in REGISTRY.items()]
    return "\n".join(lines) + "\n"


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="smoothing-lab",
        description="Verification experiments for free-flow smoothing identities.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    run_p = sub.add_parser("run", help="execute every experiment in a config")
    run_p.add_argument("config", help="path to the experiment config")
    sub.add_parser("list-experiments",
                   help="print the experiment kinds and their statements")
    emit_p = sub.add_parser("emit-default-config",
                            help="write a starter config")
    emit_p.add_argument("path", help="destination file")
    args = parser.parse_args(argv)

    if args.command == "run":
        return run(args.config)
    if args.command == "list-experiments":
        print(list_experiments(), end="")
        return 0
    if args.command == "emit-default-config":
        emit_default_config(args.path)
        print(f"wrote {args.path}")
        return 0
    return 2


if __name__ == "__main__":
    sys.exit(main())
