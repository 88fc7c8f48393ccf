"""Command-line front end: sweeps, figure-data tables, verification.

    jcqfi scan      --alpha 0:10:200 --tau 0:50:200 [--out scan.csv]
    jcqfi slice     --alpha 100:100:1 --tau 0.5:2e7:4000:log
    jcqfi collision --alpha 50:50:1 --tau 0.05:1.5:80 --n-steps 1,4,9,25
    jcqfi lindblad  --epsbar 0:10:21
    jcqfi verify    [--seed N] [--out report.json]

Ranges are min:max:count with an optional :log suffix for log spacing.
Tables are emitted in CSV (default) or JSON with 17-significant-digit,
round-trippable numbers; identical configurations produce byte-identical
output.  Progress goes to standard error only.  Exit codes: 0 success,
1 verification failure, 2 usage error, 3 I/O error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import collision, fock, jc, limits, lindblad
from .bloch import qfi_bloch
from .errors import InvalidRange

SCHEMA_LINE = "# jc-qfi v1 schema"

SCAN_COLUMNS = [
    "alpha", "tau",
    "x_ground", "z_ground", "purity_ground", "qfi_ground", "fi_z_ground",
    "x_excited", "z_excited", "purity_excited", "qfi_excited", "fi_z_excited",
]
COLLISION_COLUMNS = ["n", "tau", "qfi_numeric", "qfi_closed"]
LINDBLAD_COLUMNS = [
    "eps_bar",
    "s_star_maxqfi_ground", "max_qfi_ground", "s_star_rate_ground", "rate_ground",
    "s_star_maxqfi_excited", "max_qfi_excited", "s_star_rate_excited", "rate_excited",
    "steady_qfi",
]


@dataclass
class SweepConfig:
    mode: str
    alpha_range: tuple = (0.0, 10.0, 51)
    tau_range: tuple = (0.0, 50.0, 51)
    s_range: tuple = (0.0, 20.0, 41)
    eps_bar_range: tuple = (0.0, 10.0, 21)
    initial: object = "ground"
    output_path: str | None = None
    fmt: str = "csv"
    tail_tol: float = fock.DEFAULT_TAIL_TOL
    seed: int = 1234
    n_steps: tuple = (1, 2, 4, 9, 16, 25)
    workers: int = 4
    convention: str = "paper"

    def __post_init__(self):
        for name in ("alpha_range", "tau_range", "s_range", "eps_bar_range"):
            rng = getattr(self, name)
            if len(rng) not in (3, 4) or int(rng[2]) < 1 or rng[1] < rng[0]:
                raise InvalidRange(f"bad range for {name}: {rng!r}")
        if not (0.0 < self.tail_tol <= 1e-6):
            raise InvalidRange(f"tail_tol must lie in (0, 1e-6], got {self.tail_tol}")
        if self.fmt not in ("csv", "json"):
            raise InvalidRange(f"format must be csv or json, got {self.fmt!r}")


def parse_range(text: str) -> tuple:
    parts = text.split(":")
    if len(parts) not in (3, 4) or (len(parts) == 4 and parts[3] != "log"):
        raise InvalidRange(f"range must be min:max:count[:log], got {text!r}")
    try:
        lo, hi, count = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError as exc:
        raise InvalidRange(str(exc)) from None
    if count < 1 or hi < lo:
        raise InvalidRange(f"empty range {text!r}")
    return (lo, hi, count, "log") if len(parts) == 4 else (lo, hi, count)


def grid(rng: tuple) -> np.ndarray:
    lo, hi, count = rng[0], rng[1], int(rng[2])
    if count == 1:
        return np.array([lo])
    if len(rng) == 4:
        if lo <= 0.0:
            raise InvalidRange("log spacing needs a positive lower bound")
        return np.geomspace(lo, hi, count)
    return np.linspace(lo, hi, count)


def _fmt(x) -> str:
    return format(float(x), ".17g")


def render_table(columns, rows, fmt="csv") -> str:
    """Serialize rows (sequences of floats) with round-trippable numbers."""
    if fmt == "json":
        payload = [dict(zip(columns, map(float, row))) for row in rows]
        return json.dumps(payload, indent=1, sort_keys=False) + "\n"
    lines = [SCHEMA_LINE, ",".join(columns)]
    lines.extend(",".join(_fmt(v) for v in row) for row in rows)
    return "\n".join(lines) + "\n"


def _vacuum_row(tau: float):
    # alpha = 0 column of figure grids: the exact spontaneous-decay channel
    # with closed-form QFI; the population carries no amplitude information.
    qe = limits.vacuum_qfi(tau, 0.0, "excited")
    ze = -math.cos(2.0 * tau)
    return [0.0, tau,
            0.0, 1.0, 1.0, 4.0 * math.sin(tau) ** 2, 0.0,
            0.0, ze, ze * ze, qe, 0.0]


def _scan_rows_for_alpha(alpha: float, taus: np.ndarray, tail_tol: float):
    if alpha == 0.0:
        return [_vacuum_row(float(t)) for t in taus]
    n_max = fock.choose_cutoff(alpha, tail_tol)
    sw = jc.sweep_ground_excited(alpha, taus, n_max)
    qg = jc.qfi_from_xz(sw["x_g"], sw["z_g"], sw["dx_g"], sw["dz_g"])
    qe = jc.qfi_from_xz(sw["x_e"], sw["z_e"], sw["dx_e"], sw["dz_e"])
    fg = jc.fi_z_from_xz(sw["z_g"], sw["dz_g"])
    fe = jc.fi_z_from_xz(sw["z_e"], sw["dz_e"])
    rows = []
    for i, tau in enumerate(taus):
        rows.append([
            alpha, tau,
            sw["x_g"][i], sw["z_g"][i], sw["x_g"][i] ** 2 + sw["z_g"][i] ** 2, qg[i], fg[i],
            sw["x_e"][i], sw["z_e"][i], sw["x_e"][i] ** 2 + sw["z_e"][i] ** 2, qe[i], fe[i],
        ])
    return rows


def run_scan(config: SweepConfig):
    """Row-major (alpha outer) table over the (alpha, tau) grid."""
    alphas = grid(config.alpha_range)
    taus = grid(config.tau_range)
    rows = []
    with ThreadPoolExecutor(max_workers=max(1, config.workers)) as pool:
        futures = pool.map(
            lambda a: _scan_rows_for_alpha(float(a), taus, config.tail_tol), alphas
        )
        for k, chunk in enumerate(futures):
            rows.extend(chunk)
            _progress(config, k + 1, alphas.size)
    return SCAN_COLUMNS, rows


def run_slice(config: SweepConfig):
    """One-dimensional cut: whichever of alpha/tau has count 1 is held fixed."""
    a_count, t_count = int(config.alpha_range[2]), int(config.tau_range[2])
    if a_count == 1:
        taus = grid(config.tau_range)
        return SCAN_COLUMNS, _scan_rows_for_alpha(float(config.alpha_range[0]), taus, config.tail_tol)
    if t_count == 1:
        tau = float(config.tau_range[0])
        rows = []
        for alpha in grid(config.alpha_range):
            rows.extend(_scan_rows_for_alpha(float(alpha), np.array([tau]), config.tail_tol))
        return SCAN_COLUMNS, rows
    raise InvalidRange("slice mode needs count 1 on exactly one of --alpha/--tau")


def run_collision(config: SweepConfig):
    alpha = float(config.alpha_range[0])
    taus = grid(config.tau_range)
    rows = []
    for n in config.n_steps:
        for tau in taus:
            ch = jc.gram_to_affine(
                jc.gram_with_derivative(alpha, float(tau), fock.choose_cutoff(alpha, config.tail_tol))
            )
            st = collision.compose_n(ch, config.initial, int(n))
            rows.append([float(n), float(tau), qfi_bloch(st), collision.qfi_n_closed(float(tau), int(n))])
    return COLLISION_COLUMNS, rows


def run_lindblad(config: SweepConfig):
    rows = []
    ebs = grid(config.eps_bar_range)
    for k, eb in enumerate(ebs):
        eb = float(eb)
        row = [eb]
        for init in ("ground", "excited"):
            m = lindblad.max_qfi(eb, init, config.convention)
            r = lindblad.qfi_rate(eb, init, config.convention)
            row.extend([m.s, m.value, r.s, r.value])
        row.append(lindblad.steady_qfi(eb))
        rows.append(row)
        _progress(config, k + 1, ebs.size)
    return LINDBLAD_COLUMNS, rows


def _progress(config: SweepConfig, done: int, total: int):
    if total >= 20 and done % max(1, total // 20) == 0:
        print(f"jcqfi {config.mode}: {done}/{total}", file=sys.stderr)


def _emit(text: str, path: str | None):
    if path is None:
        sys.stdout.write(text)
        return
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="jcqfi", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="mode", required=True)
    for mode in ("scan", "slice", "collision", "lindblad", "verify"):
        p = sub.add_parser(mode)
        p.add_argument("--alpha", default="0:10:51")
        p.add_argument("--tau", default="0:50:51")
        p.add_argument("--s", default="0:20:41")
        p.add_argument("--epsbar", default="0:10:21")
        p.add_argument("--initial", default="ground")
        p.add_argument("--out", default=None)
        p.add_argument("--format", choices=("csv", "json"), default="csv")
        p.add_argument("--tail-tol", type=float, default=fock.DEFAULT_TAIL_TOL)
        p.add_argument("--seed", type=int, default=1234)
        p.add_argument("--workers", type=int, default=4)
        p.add_argument("--n-steps", default="1,2,4,9,16,25")
        p.add_argument("--convention", choices=("paper", "generator"), default="paper")
    return parser


def _parse_initial(text: str):
    if text in ("ground", "excited"):
        return text
    try:
        x0, z0 = (float(v) for v in text.split(","))
    except ValueError:
        raise InvalidRange(f"initial must be ground|excited|x0,z0, got {text!r}") from None
    return (x0, z0)


def config_from_args(args) -> SweepConfig:
    return SweepConfig(
        mode=args.mode,
        alpha_range=parse_range(args.alpha),
        tau_range=parse_range(args.tau),
        s_range=parse_range(args.s),
        eps_bar_range=parse_range(args.epsbar),
        initial=_parse_initial(args.initial),
        output_path=args.out,
        fmt=args.format,
        tail_tol=args.tail_tol,
        seed=args.seed,
        n_steps=tuple(int(v) for v in args.n_steps.split(",")),
        workers=args.workers,
        convention=args.convention,
    )


_RUNNERS = {
    "scan": run_scan,
    "slice": run_slice,
    "collision": run_collision,
    "lindblad": run_lindblad,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = config_from_args(args)
    except InvalidRange as exc:
        print(f"jcqfi: {exc}", file=sys.stderr)
        return 2

    try:
        if config.mode == "verify":
            from .verify import run_verify

            report = run_verify(seed=config.seed)
            for check in report["checks"]:
                flag = "pass" if check["passed"] else "FAIL"
                print(f"  [{flag}] {check['name']}: {check['value']:.3e} "
                      f"(tol {check['tolerance']:.3e})", file=sys.stderr)
            _emit(json.dumps(report, indent=1) + "\n", config.output_path)
            return 0 if report["all_pass"] else 1
        columns, rows = _RUNNERS[config.mode](config)
        _emit(render_table(columns, rows, config.fmt), config.output_path)
        return 0
    except InvalidRange as exc:
        print(f"jcqfi: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"jcqfi: I/O error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
