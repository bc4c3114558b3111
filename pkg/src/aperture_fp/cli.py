"""Command-line front end: ``aperture-fp <command> [options]``."""
from __future__ import annotations

import argparse
import csv
import dataclasses
import datetime as _dt
import io
import json
import os
import sys
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np

from . import __version__
from .greens import Geometry, PoleError, Truncation
from .operators import ConvergenceError, alpha_ledger, compute_alpha, _alpha_raw
from .resonance import ResonanceError, ResonanceFunctions, find_resonance

COMMANDS = ("spectrum", "resonances", "field", "quasistatic", "alpha", "validate")
EXIT_OK, EXIT_INVALID, EXIT_NONCONVERGED = 0, 1, 2


@dataclass
class RunConfig:
    command: str = "validate"
    epsilon: float = 0.02
    k: float = 1.0
    k_min: float = 2.5
    k_max: float = 7.0
    samples: int = 200
    n_max_resonance: int = 1
    family: str = "both"
    asym_form: str = "original"
    resonance: str = ""
    d1: float = 0.0
    z_samples: int = 101
    m_max: int = 200
    n_azimuthal: int = 2
    j_max: int = 4000
    radial_order: int = 16
    quad_order: int = 48
    output: str = "csv"
    out_path: str = "-"
    timestamp: bool = True
    threads: int = 0

    def validate(self):
        if self.command not in COMMANDS:
            raise ValueError(f"unknown command {self.command!r}")
        if not 0.0 < self.epsilon <= 0.2:
            raise ValueError("epsilon must satisfy 0 < epsilon <= 0.2")
        if self.command == "spectrum" and not self.k_min < self.k_max:
            raise ValueError("k_min must be smaller than k_max")
        if self.samples < 2:
            raise ValueError("samples must be >= 2")
        if self.family not in ("odd", "even", "both"):
            raise ValueError("family must be odd, even or both")
        if self.output not in ("csv", "json"):
            raise ValueError("output must be csv or json")
        if not 0.0 <= self.d1 <= 1.0:
            raise ValueError("d1 must lie in [0, 1]")
        self.truncation()

    def truncation(self) -> Truncation:
        return Truncation(m_max=self.m_max, n_max=self.n_azimuthal, j_max=self.j_max,
                          radial_order=self.radial_order, quad_order=self.quad_order)

    def echo(self) -> str:
        skip = {"out_path", "timestamp", "threads"}
        return "; ".join(f"{f.name}={getattr(self, f.name)}" for f in dataclasses.fields(self)
                         if f.name not in skip)


_FIELD_TYPES = {f.name: f.type for f in dataclasses.fields(RunConfig)}


def _coerce(name: str, raw: str):
    kind = _FIELD_TYPES[name]
    if kind == "bool":
        return raw.strip().lower() in ("1", "true", "yes", "on")
    return {"float": float, "int": int}.get(kind, str)(raw.strip())


def read_config_file(path: str) -> Dict:
    """Parse ``key = value`` lines; '#' starts a comment."""
    values = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key = value")
            key, raw = (s.strip() for s in line.split("=", 1))
            key = key.replace("-", "_")
            if key not in _FIELD_TYPES or key == "command":
                raise ValueError(f"{path}:{lineno}: unknown key {key!r}")
            values[key] = _coerce(key, raw.strip('"'))
    return values


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    # defaults are None so that unset flags never override the config file
    common.add_argument("--config", help="key=value file (flags take precedence)")
    common.add_argument("--epsilon", type=float)
    common.add_argument("--m-max", dest="m_max", type=int)
    common.add_argument("--n-azimuthal", dest="n_azimuthal", type=int,
                        help="azimuthal cutoff of the aperture basis and mode tables")
    common.add_argument("--j-max", dest="j_max", type=int)
    common.add_argument("--radial-order", dest="radial_order", type=int)
    common.add_argument("--quad-order", dest="quad_order", type=int)
    common.add_argument("--output", choices=("csv", "json"))
    common.add_argument("--out", dest="out_path")
    common.add_argument("--no-timestamp", dest="timestamp", action="store_const", const=False)
    common.add_argument("--threads", type=int, help="worker threads (env APERTURE_FP_THREADS)")

    parser = argparse.ArgumentParser(prog="aperture-fp", description=__doc__)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("spectrum", parents=[common], help="moments and amplitudes over a k grid")
    sp.add_argument("--k-min", dest="k_min", type=float)
    sp.add_argument("--k-max", dest="k_max", type=float)
    sp.add_argument("--samples", type=int)
    sp.add_argument("--d1", type=float)

    rp = sub.add_parser("resonances", parents=[common], help="complex resonances vs asymptotics")
    rp.add_argument("--family", choices=("odd", "even", "both"))
    rp.add_argument("--n-max", dest="n_max_resonance", type=int, help="resonances per family")
    rp.add_argument("--asym-form", dest="asym_form", choices=("original", "corrected"))

    fp = sub.add_parser("field", parents=[common], help="axial field profile in the hole")
    fp.add_argument("--k", type=float)
    fp.add_argument("--resonance", choices=("odd", "even"),
                    help="drive at the real part of the first resonance of this family")
    fp.add_argument("--d1", type=float)
    fp.add_argument("--z-samples", dest="z_samples", type=int)

    qp = sub.add_parser("quasistatic", parents=[common], help="low-frequency hole profile")
    qp.add_argument("--k", type=float)
    qp.add_argument("--d1", type=float)
    qp.add_argument("--z-samples", dest="z_samples", type=int)

    sub.add_parser("alpha", parents=[common], help="alpha with its extrapolation table")
    sub.add_parser("validate", parents=[common], help="run the invariant suite")
    return parser


def resolve_config(argv: Optional[Sequence[str]] = None) -> RunConfig:
    args = vars(build_parser().parse_args(argv))
    values = {}
    if args.get("config"):
        values.update(read_config_file(args["config"]))
    values.update({k: v for k, v in args.items() if v is not None and k in _FIELD_TYPES})
    if args["command"] == "quasistatic" and "k" not in values:
        values["k"] = 0.05
    if args["command"] == "alpha":
        values.setdefault("radial_order", 32)
    cfg = RunConfig(**values)
    if not cfg.threads:
        env = os.environ.get("APERTURE_FP_THREADS", "")
        cfg.threads = int(env) if env.strip() else (os.cpu_count() or 1)
    return cfg


# ---------------------------------------------------------------------------
# emission

def fmt(x) -> str:
    return f"{float(x):.16e}"


def _header(cfg: RunConfig, extra: Dict[str, str]) -> List[str]:
    lines = [f"aperture_fp {__version__} {cfg.command}"]
    if cfg.timestamp:
        lines.append("generated " + _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"))
    lines.append("config: " + cfg.echo())
    lines += [f"{k}: {v}" for k, v in extra.items()]
    return lines


def write_csv(cfg: RunConfig, columns: Sequence[str], rows: Sequence[Sequence], extra: Dict[str, str]) -> str:
    buf = io.StringIO()
    for line in _header(cfg, extra):
        buf.write("# " + line + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    writer.writerows(rows)
    return buf.getvalue()


def write_json(cfg: RunConfig, payload: Dict, extra: Dict[str, str]) -> str:
    out = dict(payload)
    out["config"] = cfg.echo()
    out.update(extra)
    if cfg.timestamp:
        out["generated"] = _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")
    return json.dumps(out, indent=2, ensure_ascii=False) + "\n"


def _table(cfg: RunConfig, columns, rows, extra) -> str:
    if cfg.output == "json":
        return write_json(cfg, {"columns": list(columns), "rows": [list(r) for r in rows]}, extra)
    return write_csv(cfg, columns, rows, extra)


def _emit(cfg: RunConfig, text: str):
    if cfg.out_path in ("-", ""):
        sys.stdout.write(text)
    else:
        with open(cfg.out_path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


# ---------------------------------------------------------------------------
# commands

def _alpha_used(cfg: RunConfig) -> float:
    return _alpha_raw(cfg.truncation())


def cmd_spectrum(cfg: RunConfig) -> str:
    from .fields import Incidence, enhancement_spectrum

    grid = np.linspace(cfg.k_min, cfg.k_max, cfg.samples)
    rows = enhancement_spectrum(Geometry(cfg.epsilon), cfg.truncation(), Incidence(cfg.d1),
                                grid, threads=cfg.threads)
    cols = ("k", "re_m1", "im_m1", "re_m2", "im_m2", "far_amplitude", "hole_peak", "error")
    out = [(fmt(r["k"]), fmt(r["m1"].real), fmt(r["m1"].imag), fmt(r["m2"].real), fmt(r["m2"].imag),
            fmt(r["far_amplitude"]), fmt(r["hole_peak"]), r["error"]) for r in rows]
    return _table(cfg, cols, out, {"alpha": fmt(_alpha_used(cfg))})


def cmd_resonances(cfg: RunConfig) -> str:
    trunc = cfg.truncation().replace(n_max=0)
    funcs = ResonanceFunctions(cfg.epsilon, trunc)
    families = ("odd", "even") if cfg.family == "both" else (cfg.family,)
    jobs = [(fam, n) for fam in families for n in range(1, cfg.n_max_resonance + 1)]
    rows = []
    for fam, n in jobs:
        res = find_resonance(fam, n, cfg.epsilon, funcs)
        asym = res.k_asymptotic if cfg.asym_form == "original" else res.k_corrected
        rows.append((fam, n, fmt(res.k_numeric.real), fmt(res.k_numeric.imag), fmt(asym.real),
                     fmt(asym.imag), fmt(abs(res.k_numeric - asym)), fmt(res.residual)))
    cols = ("family", "n", "re_k_numeric", "im_k_numeric", "re_k_asym", "im_k_asym", "abs_diff", "residual")
    return _table(cfg, cols, rows, {"alpha": fmt(funcs.alpha)})


def cmd_field(cfg: RunConfig) -> str:
    from .fields import Incidence, axial_profile, solve_system

    geom = Geometry(cfg.epsilon)
    k = cfg.k
    extra = {"alpha": fmt(_alpha_used(cfg))}
    if cfg.resonance:
        funcs = ResonanceFunctions(cfg.epsilon, cfg.truncation().replace(n_max=0))
        k = find_resonance(cfg.resonance, 1, cfg.epsilon, funcs).k_numeric.real
    extra["k"] = fmt(k)
    sol = solve_system(k, geom, cfg.truncation(), Incidence(cfg.d1))
    z = np.linspace(0.0, 1.0, cfg.z_samples)
    u = axial_profile(sol, geom, z)
    rows = [(fmt(zz), fmt(v.real), fmt(v.imag), fmt(abs(v))) for zz, v in zip(z, u)]
    extra.update(m1=f"{fmt(sol.m1.real)} {fmt(sol.m1.imag)}", m2=f"{fmt(sol.m2.real)} {fmt(sol.m2.imag)}")
    return _table(cfg, ("z", "re_u", "im_u", "abs_u"), rows, extra)


def cmd_quasistatic(cfg: RunConfig) -> str:
    from .fields import quasi_static

    qs = quasi_static(cfg.k, Geometry(cfg.epsilon), cfg.truncation(), cfg.d1)
    z = np.linspace(0.0, 1.0, cfg.z_samples)
    rows = []
    for zz in z:
        v = qs.profile(float(zz))
        rows.append((fmt(zz), fmt(v.real), fmt(v.imag), fmt(abs(v - 2 * zz))))
    extra = {"alpha": fmt(_alpha_used(cfg)), "p3": f"{fmt(qs.p3.real)} {fmt(qs.p3.imag)}"}
    return _table(cfg, ("z", "re_u0", "im_u0", "abs_u0_minus_2z"), rows, extra)


def cmd_alpha(cfg: RunConfig) -> str:
    order, m_max = cfg.radial_order, cfg.m_max
    schedule = tuple((max(1, order // d), max(8, m_max // d)) for d in (4, 2, 1))
    alpha, table = alpha_ledger(schedule)
    free = compute_alpha(Truncation(m_max=m_max, n_max=0, radial_order=order), waveguide=False)
    payload = {"alpha": alpha, "extrapolation_table": table, "free_space_check": free}
    if cfg.output == "json":
        return write_json(cfg, payload, {})
    rows = [(r["radial_order"], r["m_levels"][-1], *[fmt(v) for v in r["raw"]], fmt(r["extrapolated"]))
            for r in table]
    cols = ("radial_order", "m_max", "raw_quarter", "raw_half", "raw_full", "extrapolated")
    return write_csv(cfg, cols, rows, {"alpha": fmt(alpha), "free_space_check": fmt(free)})


def cmd_validate(cfg: RunConfig):
    from .validation import run_suite

    results = run_suite(cfg)
    lines = _header(cfg, {})
    text = "".join("# " + line + "\n" for line in lines)
    for res in results:
        text += f"{'PASS' if res.passed else 'FAIL'} {res.name}: {res.detail}\n"
    failed = sum(not r.passed for r in results)
    text += f"{len(results) - failed}/{len(results)} invariants passed\n"
    return text, failed


def run(cfg: RunConfig) -> int:
    try:
        cfg.validate()
    except ValueError as exc:
        print(f"aperture-fp: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_INVALID
    handlers = {"spectrum": cmd_spectrum, "resonances": cmd_resonances, "field": cmd_field,
                "quasistatic": cmd_quasistatic, "alpha": cmd_alpha}
    try:
        if cfg.command == "validate":
            text, failed = cmd_validate(cfg)
            _emit(cfg, text)
            return EXIT_INVALID if failed else EXIT_OK
        _emit(cfg, handlers[cfg.command](cfg))
    except ResonanceError as exc:
        print(f"aperture-fp: resonance.find_resonance did not converge: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGED
    except ConvergenceError as exc:
        print(f"aperture-fp: operators.alpha_convergence invariant failed: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGED
    except (PoleError, ValueError) as exc:
        print(f"aperture-fp: {exc}", file=sys.stderr)
        return EXIT_INVALID
    return EXIT_OK


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        cfg = resolve_config(argv)
    except (OSError, ValueError) as exc:
        print(f"aperture-fp: {exc}", file=sys.stderr)
        return EXIT_INVALID
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
