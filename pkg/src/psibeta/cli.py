"""Command-line front end: ``psibeta report | verify | sweep``.

Exit codes: 0 success, 1 usage or I/O error, 2 verification failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from .shapes import parse_omega, parse_psi

EXIT_OK, EXIT_USAGE, EXIT_FAIL = 0, 1, 2

SUITES = ("lemma1", "lemma2", "positivity", "representation", "zeromean", "orthogonality", "identity", "example1")

_DEFAULTS = {
    "psi": "power:r=2",
    "omega": "omega-power:alpha=0.5",
    "beta": 1.0,
    "n": None,
    "tol": 1e-9,
    "out": None,
    "format": None,
    "suite": None,
    "jobs": 1,
}


class UsageError(ValueError):
    pass


def parse_n(text) -> list:
    """``"8"``, ``"4,8,16"``, ``"4..64"`` (doubling), ``"4..64:x4"`` (ratio) or ``"4..64:+4"`` (step)."""
    if isinstance(text, (int, float)):
        values = [text]
    elif isinstance(text, list):
        values = [float(v) for v in text]
    else:
        s = str(text).strip()
        if ".." in s:
            rng, _, step = s.partition(":")
            a, b = (float(v) for v in rng.split("..", 1))
            step = step or "x2"
            values = []
            if step[0] == "x":
                r = float(step[1:])
                if r <= 1:
                    raise UsageError(f"geometric ratio must exceed 1 in {s!r}")
                v = a
                while v <= b * (1 + 1e-12):
                    values.append(v)
                    v *= r
            elif step[0] == "+":
                d = float(step[1:])
                if d <= 0:
                    raise UsageError(f"arithmetic step must be positive in {s!r}")
                values = list(np.arange(a, b + 0.5 * d, d))
            else:
                raise UsageError(f"unknown step {step!r}")
        else:
            try:
                values = [float(v) for v in s.split(",") if v.strip()]
            except ValueError:
                raise UsageError(f"malformed n list {s!r}") from None
    out = []
    for v in values:
        v = float(v)
        if not math.isfinite(v) or v < 1:
            raise UsageError(f"n must be a finite value >= 1, got {v}")
        out.append(int(round(v)) if v < 2**53 and abs(v - round(v)) < 1e-9 else v)
    if not out:
        raise UsageError("empty n list")
    if any(b <= a for a, b in zip(out, out[1:])):
        raise UsageError("n values must be strictly increasing")
    return out


@dataclass
class RunConfig:
    command: str
    psi: str = _DEFAULTS["psi"]
    omega: str = _DEFAULTS["omega"]
    beta: float = 1.0
    n: list = field(default_factory=list)
    tol: float = 1e-9
    out: Optional[str] = None
    format: str = "csv"
    suite: Optional[str] = None
    jobs: int = 1

    def validate(self) -> "RunConfig":
        """Parse the spec strings and return a copy with canonical forms."""
        try:
            psi, omega = parse_psi(self.psi), parse_omega(self.omega)
        except ValueError as e:
            raise UsageError(str(e)) from None
        if not math.isfinite(self.beta):
            raise UsageError("beta must be finite")
        if self.format not in ("csv", "json"):
            raise UsageError(f"unknown format {self.format!r}")
        if self.tol <= 0:
            raise UsageError("tol must be positive")
        if self.command == "verify" and self.suite not in SUITES:
            raise UsageError(f"unknown suite {self.suite!r}; choose from {', '.join(SUITES)}")
        return replace(self, psi=psi.spec, omega=omega.spec)


# ------------------------------------------------------------------ report


def _report_row(args):
    from .asymptotics import approx_report

    psi, omega, beta, n, tol = args
    return approx_report(parse_psi(psi), parse_omega(omega), beta, int(n), tol)


def _rows(cfg: RunConfig):
    tasks = [(cfg.psi, cfg.omega, cfg.beta, n, cfg.tol) for n in cfg.n]
    if cfg.jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(cfg.jobs) as ex:
            return list(ex.map(_report_row, tasks))
    return [_report_row(t) for t in tasks]


def _render_reports(rows, fmt: str) -> str:
    from .asymptotics import write_report_csv

    if fmt == "json":
        return json.dumps([r.to_dict() for r in rows], indent=1) + "\n"
    buf = io.StringIO()
    write_report_csv(rows, buf)
    return buf.getvalue()


def cmd_report(cfg: RunConfig) -> tuple[int, str]:
    rows = _rows(cfg)
    status = EXIT_FAIL if any("ORDER_VIOLATION" in r.flags for r in rows) else EXIT_OK
    return status, _render_reports(rows, cfg.format)


def cmd_sweep(cfg: RunConfig) -> tuple[int, str]:
    rows = _rows(cfg)
    status = EXIT_FAIL if any("ORDER_VIOLATION" in r.flags for r in rows) else EXIT_OK
    return status, _render_reports(rows, "csv" if cfg.format is None else cfg.format)


# ------------------------------------------------------------------ verify


@dataclass(frozen=True)
class VerifyRow:
    case: str
    value: float
    bound: float
    status: str  # "pass", "fail" or "skipped"


def _row(case: str, value: float, bound: float, ok: bool) -> VerifyRow:
    return VerifyRow(case, float(value), float(bound), "pass" if ok else "fail")


def _suite_lemma1(cfg):
    from .oscillatory import S_function, find_S_zero

    rows = []
    for a in (1.0, 2.0):
        for s in (1.0, 2.0):
            for k in range(1, 11):
                z = find_S_zero(a, s, 0, k)
                x = (2 * k - 1) * math.pi / (2 * a)
                sign_ok = np.sign(S_function(a, s, x, 0)) == (-1) ** (k + 1)
                rows.append(_row(f"a={a:g},s={s:g},i=0,k={k}", z.residual, 1e-10, z.residual <= 1e-10 and sign_ok))
    return rows


def _suite_lemma2(cfg):
    from .oscillatory import lemma2_scaled_integral

    rows = []
    for om in ("omega-power:alpha=0.5", "omega-loginv:alpha=1"):
        omega = parse_omega(om)
        for n in (4, 16, 64, 256):
            for s in (1.0, 2.0):
                _, ratio = lemma2_scaled_integral(omega, n, float(n), s, 0)
                rows.append(_row(f"{om},n={n},s={s:g}", ratio, 16 * math.pi, abs(ratio) <= 16 * math.pi))
    return rows


def _suite_positivity(cfg):
    from .oscillatory import psi_tail_sine

    t = np.array([0.01, 0.05] + [0.1 * j for j in range(1, 11)])
    rows = []
    for ps in ("power:r=2", "logpower:gamma=2"):
        psi = parse_psi(ps)
        for n in (1, 2, 4, 8, 16, 32):
            v = float(np.min(psi_tail_sine(psi, n, t, check_positive=False)))
            rows.append(_row(f"{ps},n={n}", v, 0.0, v > 0))
    return rows


def _suite_representation(cfg):
    from .linear_method import TauKernel, direct_remainder, remainder_via_representation
    from .trig import TrigPoly, psi_beta_antiderivative

    rng = np.random.default_rng(20240101)
    x = np.linspace(-np.pi, np.pi, 16, endpoint=False)
    rows = []
    for ps in ("power:r=2", "logpower:gamma=2"):
        psi = parse_psi(ps)
        for beta in (0.0, 1.0, 1.5):
            for n in (2, 4, 8):
                k = TauKernel(psi, n)
                err = 0.0
                for _ in range(3):
                    order = int(rng.integers(1, 9))
                    g = TrigPoly(0.0, rng.normal(size=order), rng.normal(size=order))
                    f = psi_beta_antiderivative(g, psi, beta)
                    rep = remainder_via_representation(g, k, beta, x)
                    err = max(err, float(np.max(np.abs(direct_remainder(f, psi, n, x) - rep.value))))
                rows.append(_row(f"{ps},beta={beta:g},n={n}", err, 1e-6, err <= 1e-6))
    return rows


def _suite_zeromean(cfg):
    from .linear_method import TauKernel, zero_mean_integral

    psi = parse_psi(cfg.psi)
    rows = []
    for beta in (0.0, 0.5, 1.0, 1.5):
        for n in (2, 4, 8):
            v, _ = zero_mean_integral(TauKernel(psi, n), beta)
            rows.append(_row(f"{cfg.psi},beta={beta:g},n={n}", v, 1e-6, abs(v) <= 1e-6))
    return rows


def _suite_orthogonality(cfg):
    from .extremal import ExtremalSpec, alternation_count, orthogonality_check

    psi, omega = parse_psi(cfg.psi), parse_omega(cfg.omega)
    rows = []
    for n in (4, 8):
        spec = ExtremalSpec(n, omega, psi, cfg.beta)
        for k in range(1, n):
            v = orthogonality_check(spec, k)
            rows.append(_row(f"n={n},k={k}", v, 1e-10, abs(v) <= 1e-10))
        if math.sin(cfg.beta * math.pi / 2) != 0:
            c = alternation_count(spec)
            rows.append(_row(f"n={n},alternations", c, 2 * n, c == 2 * n))
    return rows


IDENTITY_BOUND = 1.0


def _suite_identity(cfg):
    from .asymptotics import identity_omega2t

    psi, omega = parse_psi(cfg.psi), parse_omega(cfg.omega)
    rows = []
    for n in (4, 8, 16, 32, 64):
        _, _, r = identity_omega2t(psi, omega, n)
        rows.append(_row(f"{cfg.psi},{cfg.omega},n={n}", r, IDENTITY_BOUND, abs(r) <= IDENTITY_BOUND))
    return rows


def _suite_example1(cfg):
    from .asymptotics import ASYMPTOTIC_GUARD, example1_asymptote, main_term

    gamma, alpha = 2.0, 1.0
    psi, omega = parse_psi("logpower:gamma=2"), parse_omega("omega-loginv:alpha=1")
    ns = cfg.n or [1e6, 1e8, 1e30, 1e40]
    rows = []
    for n in ns:
        n = float(n)
        I = main_term(psi, omega, cfg.beta, n)
        scale = float(psi.at_log(math.log(n))) * float(omega.at_log_inv(math.log(n)))
        case = f"gamma=2,alpha=1,beta={cfg.beta:g},n={n:.17g}"
        if I <= 0 or I / scale < ASYMPTOTIC_GUARD:
            rows.append(VerifyRow(case, math.nan, math.nan, "skipped"))
            continue
        r = I / example1_asymptote(gamma, alpha, cfg.beta, n)
        rows.append(_row(case, r, 0.3, abs(r - 1) <= 0.3))
    return rows


_SUITE_FUNCS = {
    "lemma1": _suite_lemma1,
    "lemma2": _suite_lemma2,
    "positivity": _suite_positivity,
    "representation": _suite_representation,
    "zeromean": _suite_zeromean,
    "orthogonality": _suite_orthogonality,
    "identity": _suite_identity,
    "example1": _suite_example1,
}


def _render_verify(rows, fmt: str) -> str:
    if fmt == "json":
        return json.dumps([{"case": r.case, "value": None if math.isnan(r.value) else r.value,
                            "bound": None if math.isnan(r.bound) else r.bound, "pass": r.status} for r in rows], indent=1) + "\n"
    buf = io.StringIO()
    buf.write("# psibeta-verify v1\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["case", "value", "bound", "pass"])
    for r in rows:
        w.writerow([r.case, f"{r.value:.17g}", f"{r.bound:.17g}", r.status])
    return buf.getvalue()


def cmd_verify(cfg: RunConfig) -> tuple[int, str]:
    rows = _SUITE_FUNCS[cfg.suite](cfg)
    status = EXIT_FAIL if any(r.status == "fail" for r in rows) else EXIT_OK
    return status, _render_verify(rows, cfg.format)


# -------------------------------------------------------------------- main


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--psi", help="psi spec, e.g. power:r=2 or logpower:gamma=2")
    common.add_argument("--omega", help="omega spec, e.g. omega-power:alpha=0.5 or omega-loginv:alpha=1")
    common.add_argument("--beta", type=float)
    common.add_argument("--n", help="8 | 4,8,16 | 4..64 | 4..64:x2 | 4..64:+4")
    common.add_argument("--tol", type=float)
    common.add_argument("--out", help="output path (default stdout)")
    common.add_argument("--format", choices=("csv", "json"))
    common.add_argument("--suite", choices=SUITES)
    common.add_argument("--config", help="JSON file with the same keys; flags override it")
    common.add_argument("--jobs", type=int, help="worker processes for report/sweep rows")
    p = argparse.ArgumentParser(prog="psibeta", description="Best approximation of (psi, beta)-differentiable classes.")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("report", parents=[common], help="bracket rows lower <= E_n(f*) <= upper")
    sub.add_parser("verify", parents=[common], help="run a verification suite")
    sub.add_parser("sweep", parents=[common], help="CSV sweep over an n range")
    return p


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    values = dict(_DEFAULTS)
    if ns.config:
        try:
            with open(ns.config) as fh:
                loaded = json.load(fh)
        except (OSError, json.JSONDecodeError) as e:
            raise UsageError(f"cannot read config {ns.config}: {e}") from None
        unknown = set(loaded) - set(_DEFAULTS)
        if unknown:
            raise UsageError(f"unknown config keys: {sorted(unknown)}")
        values.update(loaded)
    for key in _DEFAULTS:
        v = getattr(ns, key, None)
        if v is not None:
            values[key] = v
    cmd = ns.command
    if values["n"] is None:
        if cmd in ("report", "sweep"):
            raise UsageError("--n is required")
        n = []
    else:
        n = parse_n(values["n"])
    fmt = values["format"] or ("json" if cmd == "report" else "csv")
    return RunConfig(
        command=cmd,
        psi=str(values["psi"]),
        omega=str(values["omega"]),
        beta=float(values["beta"]),
        n=n,
        tol=float(values["tol"]),
        out=values["out"],
        format=fmt,
        suite=values["suite"],
        jobs=int(values["jobs"]),
    ).validate()


_COMMANDS = {"report": cmd_report, "verify": cmd_verify, "sweep": cmd_sweep}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code == 0 else EXIT_USAGE
    try:
        cfg = config_from_args(ns)
    except (UsageError, ValueError) as e:
        print(f"psibeta: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    fh = sys.stdout
    if cfg.out:
        try:
            fh = open(cfg.out, "w", newline="")
        except OSError as e:
            print(f"psibeta: error: cannot write {cfg.out}: {e}", file=sys.stderr)
            return EXIT_USAGE
    try:
        status, text = _COMMANDS[cfg.command](cfg)
        fh.write(text)
    finally:
        if fh is not sys.stdout:
            fh.close()
    if status == EXIT_FAIL:
        print("psibeta: verification failure", file=sys.stderr)
    return status


if __name__ == "__main__":
    sys.exit(main())
