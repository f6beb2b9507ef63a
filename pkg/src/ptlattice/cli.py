"""Command-line front end.

Usage::

    ptlattice <command> --config <path> [--out <path>] [--format csv|json]

Exit codes: 0 success, 1 validation failure, 2 runtime/numerical failure
(including failed invariant checks). Errors are reported as one JSON record
on stderr.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional

import numpy as np

from . import __version__
from .bethe import find_real_roots
from .config import COMMANDS, FORMATS, RunConfig, parse_config
from .correspondence import map_to_counterpart, sweep, worker_count
from .dynamics import WavePacket, drain_vs_lead_experiment
from .errors import DomainError, PTLatticeError, ValidationError
from .lattice import LatticeSpec, build_hermitian_device, build_pt_chain
from .scattering import closed_form_r, solve_two_lead
from .spectral import eigenpairs, pt_symmetry_residual

log = logging.getLogger(__name__)

# column name -> type, per command; the order is the CSV column order
COLUMNS: Dict[str, Dict[str, type]] = {
    "spectrum": {"N": int, "Ns": int, "gamma": float, "index": int, "E_re": float, "E_im": float,
                 "is_real": bool, "pt_residual": float, "pt_unbroken": bool},
    "roots": {"N": int, "Ns": int, "gamma": float, "k": float, "E": float, "chi": float, "residual": float,
              "eig_error": float},
    "scatter": {"N": int, "Ns": int, "gamma": float, "k": float, "E": float, "nu": float, "V": float,
                "r_re": float, "r_im": float, "t_re": float, "t_im": float, "r_abs": float, "t_abs": float,
                "closed_r_re": float, "closed_r_im": float},
    "correspond": {"N": int, "Ns": int, "gamma": float, "k": float, "E": float, "nu": float, "V": float,
                   "r_abs": float, "t_abs": float, "align_residual": float},
    "evolve": {"Ns": int, "gamma": float, "k0": float, "sigma": float, "sites": int, "absorbed": float,
               "transmitted": float, "discrepancy": float, "nu": float, "V": float, "t_final": float},
}

EIG_MATCH_TOL = 1e-9
UNITARITY_TOL = 1e-10
CLOSED_FORM_TOL = 1e-9


@dataclass
class RunResult:
    rows: List[dict] = field(default_factory=list)
    failed_checks: List[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failed_checks


def format_value(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return format(float(value), ".17g")


def parse_value(text: str, kind: type):
    if text == "":
        return None
    if kind is bool:
        return text == "true"
    return kind(text)


def to_csv(rows: List[dict], command: str) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    columns = list(COLUMNS[command])
    writer.writerow(columns)
    for row in rows:
        writer.writerow([format_value(row[c]) for c in columns])
    return buf.getvalue()


def read_csv(text: str, command: str) -> List[dict]:
    """Inverse of :func:`to_csv`."""
    types = COLUMNS[command]
    reader = csv.DictReader(io.StringIO(text))
    return [{c: parse_value(row[c], types[c]) for c in types} for row in reader]


def _json_value(value):
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if value is None or not math.isfinite(value):
        return None
    return float(value)


def to_json(rows: List[dict], command: str) -> str:
    records = [{c: _json_value(row[c]) for c in COLUMNS[command]} for row in rows]
    return json.dumps(records, indent=2) + "\n"


def _parallel_map(fn: Callable, items: list) -> list:
    with ThreadPoolExecutor(max_workers=worker_count()) as pool:
        return list(pool.map(fn, items))


def _spectrum_rows(spec: LatticeSpec):
    H = build_pt_chain(spec)
    report = eigenpairs(H)
    rows, failed = [], []
    scale = np.max(np.abs(H.entries)) * H.dim
    energies = report.energies
    for i, pair in enumerate(report.pairs):
        if np.linalg.norm(H.entries @ pair.vector - pair.energy * pair.vector) >= 1e-9 * max(scale, 1.0):
            failed.append(f"eigen_residual N={spec.N} Ns={spec.Ns} gamma={spec.gamma} index={i}")
        if np.min(np.abs(energies - np.conj(pair.energy))) > 1e-9 * max(1.0, abs(pair.energy)):
            failed.append(f"conjugate_pairs N={spec.N} Ns={spec.Ns} gamma={spec.gamma} index={i}")
        rows.append({"N": spec.N, "Ns": spec.Ns, "gamma": spec.gamma, "index": i, "E_re": pair.energy.real,
                     "E_im": pair.energy.imag, "is_real": pair.is_real,
                     "pt_residual": pt_symmetry_residual(pair.vector), "pt_unbroken": report.pt_unbroken})
    return rows, failed


def _roots_rows(spec: LatticeSpec):
    real = eigenpairs(build_pt_chain(spec)).real_energies
    rows, failed = [], []
    for root in find_real_roots(spec):
        err = float(np.min(np.abs(real - root.energy))) if real.size else math.inf
        if err >= EIG_MATCH_TOL:
            failed.append(f"eig_match N={spec.N} Ns={spec.Ns} gamma={spec.gamma} k={root.k}")
        if root.residual >= 1e-10:
            failed.append(f"root_residual N={spec.N} Ns={spec.Ns} gamma={spec.gamma} k={root.k}")
        rows.append({"N": spec.N, "Ns": spec.Ns, "gamma": spec.gamma, "k": root.k, "E": root.energy,
                     "chi": root.chi.real, "residual": root.residual, "eig_error": err})
    return rows, failed


def _scatter_rows(cfg: RunConfig):
    ks = cfg.sweep.get("k") or [cfg.scatter["k"]]

    def one(item):
        spec, k = item
        if "nu" in cfg.scatter or "V" in cfg.scatter:
            nu, V = cfg.scatter.get("nu", 0.0), cfg.scatter.get("V", 0.0)
        else:
            params = map_to_counterpart(k, spec.gamma, spec.J)
            nu, V = params.nu, params.V
        device = build_hermitian_device(spec, V, side="both")
        sol = solve_two_lead(device, spec.Ns, spec.Ns + spec.N - 1, nu, nu, k, spec.J)
        failed = []
        if abs(sol.flux_balance - 1.0) >= UNITARITY_TOL:
            failed.append(f"unitarity N={spec.N} Ns={spec.Ns} gamma={spec.gamma} k={k}")
        try:
            closed = closed_form_r(k, spec.N, spec.Ns, V, nu, spec.J).r
        except DomainError:
            closed = None
        if closed is not None and abs(closed - sol.r) >= CLOSED_FORM_TOL:
            failed.append(f"closed_form N={spec.N} Ns={spec.Ns} gamma={spec.gamma} k={k}")
        row = {"N": spec.N, "Ns": spec.Ns, "gamma": spec.gamma, "k": k, "E": -2 * spec.J * np.cos(k), "nu": nu,
               "V": V, "r_re": sol.r.real, "r_im": sol.r.imag, "t_re": sol.t.real, "t_im": sol.t.imag,
               "r_abs": abs(sol.r), "t_abs": abs(sol.t),
               "closed_r_re": None if closed is None else closed.real,
               "closed_r_im": None if closed is None else closed.imag}
        return [row], failed

    return [(spec, k) for spec in cfg.grid() for k in ks], one


def _correspond_rows(cfg: RunConfig):
    result = sweep(cfg.grid())
    rows = [{"N": r.spec.N, "Ns": r.spec.Ns, "gamma": r.spec.gamma, "k": r.root.k, "E": r.root.energy,
             "nu": r.params.nu, "V": r.params.V, "r_abs": r.r_abs, "t_abs": r.t_abs,
             "align_residual": r.align_residual} for r in result.reports]
    failed = [f"correspondence N={spec.N} Ns={spec.Ns} gamma={spec.gamma} k={k}: {msg}"
              for spec, k, msg in result.failures]
    return rows, failed


def _evolve_rows(cfg: RunConfig):
    ev = cfg.evolve
    sigmas = cfg.sweep.get("sigma") or [ev["sigma"]]
    Ns = int(cfg.lattice["Ns"])
    J = cfg.lattice["J"]

    def one(item):
        gamma, sigma = item
        spec = LatticeSpec.uniform(1, Ns, gamma, J)
        x0 = int(ev["x0"]) if "x0" in ev else int(math.ceil(5 * sigma)) + 5
        packet = WavePacket(x0=x0, k0=ev["k0"], sigma=sigma)
        res = drain_vs_lead_experiment(spec, packet, int(ev["sites"]), t_final=ev.get("t_final"))
        return [{"Ns": Ns, "gamma": gamma, "k0": ev["k0"], "sigma": sigma, "sites": int(ev["sites"]),
                 "absorbed": res.absorbed, "transmitted": res.transmitted, "discrepancy": res.discrepancy,
                 "nu": res.nu, "V": res.V, "t_final": res.t_final}], []

    return [(g, s) for g in cfg.axis("gamma") for s in sigmas], one


def run(cfg: RunConfig) -> RunResult:
    """Execute the pipeline of ``cfg.command``; module errors propagate."""
    result = RunResult()
    if cfg.command == "correspond":
        rows, failed = _correspond_rows(cfg)
        result.rows, result.failed_checks = rows, failed
        return result

    if cfg.command == "spectrum":
        items, fn = cfg.grid(), _spectrum_rows
    elif cfg.command == "roots":
        items, fn = cfg.grid(), _roots_rows
    elif cfg.command == "scatter":
        items, fn = _scatter_rows(cfg)
    else:
        items, fn = _evolve_rows(cfg)
    for rows, failed in _parallel_map(fn, items):
        result.rows.extend(rows)
        result.failed_checks.extend(failed)
    return result


def _error_record(exc: Exception) -> dict:
    record = {"status": "error", "error": type(exc).__name__, "message": str(exc)}
    for attr in ("check", "key", "line"):
        value = getattr(exc, attr, None)
        if value is not None:
            record[attr] = value
    return record


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ptlattice", description=__doc__.split("\n")[0])
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", required=True, help="flat key = value configuration file")
    parser.add_argument("--out", help="output path (default: stdout)")
    parser.add_argument("--format", choices=FORMATS, help="output format (default: csv or output.format)")
    parser.add_argument("-v", "--verbose", action="store_true")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        with open(args.config, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        print(json.dumps(_error_record(ValidationError(f"cannot read config: {exc}", key="config"))),
              file=sys.stderr)
        return 1

    try:
        cfg = parse_config(text, command=args.command)
        if args.format:
            cfg.output_format = args.format
        if args.out:
            cfg.output_path = args.out
        result = run(cfg)
    except ValidationError as exc:
        print(json.dumps(_error_record(exc)), file=sys.stderr)
        return 1
    except PTLatticeError as exc:
        print(json.dumps(_error_record(exc)), file=sys.stderr)
        return 2

    text = (to_json if cfg.output_format == "json" else to_csv)(result.rows, cfg.command)
    if cfg.output_path:
        with open(cfg.output_path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)

    if not result.ok:
        record = {"status": "failed", "error": "InvariantCheckFailed", "check": "invariants",
                  "failures": result.failed_checks}
        print(json.dumps(record), file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
