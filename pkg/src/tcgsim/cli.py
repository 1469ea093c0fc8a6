"""Command-line front end.  Every subcommand prints its main artifact (CSV or
JSON) to stdout and, with --out, also writes it under that directory.

Flags override TCGSIM_* environment variables, which override built-in
defaults; the device file (--device-config) replaces the built-in device table.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from . import composer as comp
from . import library as lib
from . import tomography as tomo
from .circuit import Circuit, computational_labels, depth_and_counts, simulate
from .core import state_fidelity
from .noise import DeviceConfig, NoiseConfigError, NoiseModel
from .verify import golden_checks, structural_checks

ENV_PREFIX = "TCGSIM_"
COMPARATOR_DEVICE_ORDER = (2, 0, 1, 3)  # sites (Q3, Q1, Q2, Q4)


@dataclass(frozen=True)
class RunConfig:
    seed: int = 0
    shots: int = 0
    noise: bool = False
    device_config: Optional[str] = None
    out: Optional[str] = None
    scheme: Optional[str] = None
    expand_composites: bool = False

    def device(self) -> DeviceConfig:
        return DeviceConfig.load(self.device_config) if self.device_config else DeviceConfig.default()

    def noise_model(self, n_sites: int, order=None, leak_rate: float = 0.0) -> Optional[NoiseModel]:
        if not self.noise:
            return None
        order = list(order) if order is not None else list(range(n_sites))
        return self.device().noise_model(order=order, leak_rate=leak_rate)


def _env_bool(v: str) -> bool:
    return v.strip().lower() in ("1", "true", "yes", "on")


def resolve_config(ns: argparse.Namespace, env=None) -> RunConfig:
    env = os.environ if env is None else env
    spec = {"seed": int, "shots": int, "noise": _env_bool, "device_config": str, "out": str, "scheme": str,
            "expand_composites": _env_bool}
    vals = {}
    for key, conv in spec.items():
        flag = getattr(ns, key, None)
        if flag is not None:
            vals[key] = flag
        elif ENV_PREFIX + key.upper() in env:
            vals[key] = conv(env[ENV_PREFIX + key.upper()])
    cfg = RunConfig(**vals)
    if cfg.shots < 0:
        raise ValueError("shots must be >= 0")
    return cfg


# ---------------------------------------------------------------- output helpers

def _csv(rows: list, columns: list) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=columns, lineterminator="\n", extrasaction="ignore")
    w.writeheader()
    for r in rows:
        w.writerow({k: (repr(float(v)) if isinstance(v, (float, np.floating)) else v) for k, v in r.items()})
    return buf.getvalue()


def _json(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=1) + "\n"


def _cmatrix(m: np.ndarray) -> list:
    return [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(m)]


def _emit(cfg: RunConfig, name: str, text: str) -> None:
    sys.stdout.write(text)
    if cfg.out:
        p = Path(cfg.out)
        p.mkdir(parents=True, exist_ok=True)
        (p / name).write_text(text)


def _shots(cfg: RunConfig) -> Optional[int]:
    return cfg.shots or None


# ---------------------------------------------------------------- subcommands

def cmd_verify(cfg: RunConfig, args) -> int:
    rows = golden_checks(bare=not args.flip_convention) + structural_checks()
    report = {"tolerance": rows[0].tol, "entries": [r.to_dict() for r in rows],
              "failed": [r.name for r in rows if not r.ok]}
    _emit(cfg, "verify.json", _json(report))
    for r in rows:
        sys.stderr.write(f"{'ok  ' if r.ok else 'FAIL'} {r.name:<22} {r.residual:.3e}  ({r.convention})\n")
    return 0 if not report["failed"] else 1


def cmd_depth_table(cfg: RunConfig, args) -> int:
    if args.m_max < 3:
        raise ValueError("--m-max must be >= 3")
    rows = lib.depth_rows(args.m_max, cfg.expand_composites)
    _emit(cfg, "depth_table.csv", _csv(rows, ["circuit", "scheme", "m", "N1q", "N2q", "depth"]))
    d = {(r["circuit"], r["scheme"], r["m"]): r["depth"] for r in rows}
    summary = {}
    for fam in ("GHZ", "W"):
        for m in sorted({3, args.m_max}):
            summary[f"{fam}_m{m}_depth_reduction"] = 1 - d[(fam, "CU", m)] / d[(fam, "CZ", m)]
    summary["comparator_depth_reduction"] = 1 - d[("comparator", "TCG", 4)] / d[("comparator", "Clifford", 4)]
    sys.stderr.write(_json(summary))
    return 0


def _prep_fidelity(kind, m, x, scheme, cfg: RunConfig, seed) -> float:
    build, target = (lib.ghz_circuit, lib.ghz_state) if kind == "ghz" else (lib.w_circuit, lib.w_state)
    c = build(m, x, scheme)
    nm = cfg.noise_model(m)
    rho = simulate(c, noise=nm).matrix
    psi = tomo.restrict_state(target(m, x))
    est = tomo.qst_from_rho(rho, c.dims, _shots(cfg), np.random.default_rng(seed))
    return state_fidelity(est, psi)


def cmd_prepare(cfg: RunConfig, args) -> int:
    scheme = cfg.scheme or "CU"
    if args.sweep:
        grid = np.linspace(0, 2 * np.pi, 9) if args.kind == "ghz" else np.linspace(0, np.sqrt(2), 5)
    else:
        grid = [args.param if args.param is not None else (0.0 if args.kind == "ghz" else 1.0)]
    reps = args.reps if (cfg.shots or cfg.noise) else 1
    rows = []
    seeds = np.random.SeedSequence(cfg.seed).spawn(len(grid))
    for x, ss in zip(grid, seeds):
        sub = [int(s.generate_state(1)[0]) for s in ss.spawn(reps)]
        f = np.array([_prep_fidelity(args.kind, args.m, float(x), scheme, cfg, s) for s in sub])
        rows.append(dict(kind=args.kind, scheme=scheme, m=args.m, param=float(x), reps=reps,
                         fidelity_mean=float(f.mean()), fidelity_sd=float(f.std(ddof=1)) if reps > 1 else 0.0))
    _emit(cfg, f"prepare_{args.kind}_{scheme}.csv",
          _csv(rows, ["kind", "scheme", "m", "param", "reps", "fidelity_mean", "fidelity_sd"]))
    return 0


def cmd_comparator(cfg: RunConfig, args) -> int:
    scheme = cfg.scheme or "TCG"
    c = lib.clifford_comparator_circuit() if scheme == "Clifford" else lib.comparator_circuit()
    nm = cfg.noise_model(4, COMPARATOR_DEVICE_ORDER)
    m0 = lib.comparator_reference_table()
    reps = args.reps if (cfg.shots or cfg.noise) else 1
    seeds = np.random.SeedSequence(cfg.seed).generate_state(reps)
    tables = [lib.comparator_truth_table(_shots(cfg), int(s), nm, c).matrix for s in seeds]
    fids = np.array([tomo.truth_table_fidelity(t, m0) for t in tables])
    report = {"scheme": scheme, "labels": ["".join(map(str, l)) for l in computational_labels(4)],
              "site_names": list(c.names), "M0": m0.tolist(), "Me": tables[0].tolist(),
              "fidelity": float(fids[0]), "fidelity_mean": float(fids.mean()),
              "fidelity_sd": float(fids.std(ddof=1)) if reps > 1 else 0.0, "reps": reps,
              "counts": depth_and_counts(c, expand_composites=True)}
    _emit(cfg, f"comparator_{scheme}.json", _json(report))
    return 0


def _cu_circuit(theta, phi, dims=(3, 3)) -> Circuit:
    return Circuit(dims).append("cu", (0, 1), theta=theta, phi=phi)


def cmd_qpt(cfg: RunConfig, args) -> int:
    dims = (4, 3) if args.leak_rate > 0 else (3, 3)
    c = _cu_circuit(args.theta, args.phi, dims)
    chi0 = tomo.chi_of_unitary(comp.cu(args.theta, args.phi).restricted.matrix)
    nm = cfg.noise_model(2, leak_rate=args.leak_rate)
    reps = args.reps if (cfg.shots or cfg.noise) else 1
    seeds = np.random.SeedSequence(cfg.seed).generate_state(reps)
    chis = [tomo.qpt(c, _shots(cfg), int(s), nm) for s in seeds]
    f = np.array([x.fidelity_with_loss(chi0) for x in chis])
    report = {"theta": args.theta, "phi": args.phi, "basis": list(tomo.PAULI_LABELS),
              "chi": _cmatrix(chis[0].chi), "chi0": _cmatrix(chi0), "survival": chis[0].survival,
              "fidelity": float(f[0]), "fidelity_mean": float(f.mean()),
              "fidelity_sd": float(f.std(ddof=1)) if reps > 1 else 0.0, "reps": reps}
    _emit(cfg, "qpt.json", _json(report))
    return 0


def cmd_feedback(cfg: RunConfig, args) -> int:
    st = tomo.feedback_calibrate(args.theta, args.phi, args.dtheta, args.dphi, cfg.noise_model(2),
                                 args.max_iter, args.threshold, _shots(cfg), cfg.seed, args.local_z)
    rows = []
    for k, f in enumerate(st.history):
        est = st.estimates[k] if k < len(st.estimates) else (float("nan"), float("nan"))
        rows.append(dict(iteration=k + 1, fidelity=f, fidelity_cp=st.cp_history[k],
                         fidelity_params=st.param_history[k], theta_est=est[0], phi_est=est[1]))
    _emit(cfg, "feedback.csv", _csv(rows, ["iteration", "fidelity", "fidelity_cp", "fidelity_params",
                                           "theta_est", "phi_est"]))
    sys.stderr.write(f"converged={st.converged} iterations={st.iterations} final_F={st.fidelity:.6f}\n")
    return 0


def cmd_scan(cfg: RunConfig, args) -> int:
    nm = cfg.noise_model(2)
    if args.kind == "rotation":
        rows = lib.rotation_scan(np.linspace(0, 2 * np.pi, args.points), noise=nm)
        cols = ["theta"]
    elif args.kind == "phase":
        rows = lib.phase_scan(np.linspace(0, 2 * np.pi, args.points), args.phi0, nm)
        cols = ["phi"]
    else:
        rows = lib.echo_phase_scan(np.linspace(0, 2 * np.pi, args.points), args.phi0, nm)
        cols = ["phi"]
    _emit(cfg, f"scan_{args.kind}.csv", _csv(rows, cols + ["P00", "P01", "P10", "P11", "leak"]))
    return 0


def cmd_decohere(cfg: RunConfig, args) -> int:
    t1 = np.geomspace(2.0, 50.0, args.points)
    tp = np.geomspace(1.0, 50.0, args.points)
    rows = lib.decoherence_comparison(t1, tp, base=cfg.device().noise_model(order=[0, 1]))
    _emit(cfg, "decohere.csv", _csv(rows, ["kind", "value", "initial", "CZ", "CU", "CNOT"]))
    return 0


# ---------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--shots", type=int, default=None, help="0 = exact probabilities")
    common.add_argument("--noise", action="store_const", const=True, default=None,
                        help="enable the device noise model")
    common.add_argument("--device-config", default=None, help="JSON device table")
    common.add_argument("--out", default=None, help="also write artifacts to this directory")
    common.add_argument("--scheme", default=None)
    common.add_argument("--expand-composites", action="store_const", const=True, default=None)

    p = argparse.ArgumentParser(prog="tcgsim", description="Transition composite gate simulator")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("verify", parents=[common], help="golden-matrix residuals")
    s.add_argument("--flip-convention", action="store_true", help="negative control: rotation convention")
    s.set_defaults(func=cmd_verify)

    s = sub.add_parser("depth-table", parents=[common], help="gate counts and depths")
    s.add_argument("--m-max", type=int, default=10)
    s.set_defaults(func=cmd_depth_table)

    s = sub.add_parser("prepare", parents=[common], help="GHZ/W preparation with state tomography")
    s.add_argument("--kind", choices=("ghz", "w"), default="ghz")
    s.add_argument("--m", type=int, default=3)
    s.add_argument("--param", type=float, default=None, help="tau (ghz) or lambda (w)")
    s.add_argument("--sweep", action="store_true")
    s.add_argument("--reps", type=int, default=20)
    s.set_defaults(func=cmd_prepare)

    s = sub.add_parser("comparator", parents=[common], help="comparator truth table and fidelity")
    s.add_argument("--reps", type=int, default=10)
    s.set_defaults(func=cmd_comparator)

    s = sub.add_parser("qpt", parents=[common], help="process tomography of CU(theta, phi)")
    s.add_argument("--theta", type=float, default=float(np.pi))
    s.add_argument("--phi", type=float, default=float(np.pi))
    s.add_argument("--leak-rate", type=float, default=0.0)
    s.add_argument("--reps", type=int, default=10)
    s.set_defaults(func=cmd_qpt)

    s = sub.add_parser("feedback", parents=[common], help="QPT feedback calibration of CU")
    s.add_argument("--theta", type=float, default=float(np.pi))
    s.add_argument("--phi", type=float, default=float(np.pi))
    s.add_argument("--dtheta", type=float, default=0.1)
    s.add_argument("--dphi", type=float, default=0.0)
    s.add_argument("--max-iter", type=int, default=5)
    s.add_argument("--threshold", type=float, default=0.999)
    s.add_argument("--local-z", action="store_true", help="fit local Z phases jointly")
    s.set_defaults(func=cmd_feedback)

    s = sub.add_parser("scan", parents=[common], help="rotation, phase or echo scans")
    s.add_argument("kind", choices=("rotation", "phase", "echo"))
    s.add_argument("--points", type=int, default=33)
    s.add_argument("--phi0", type=float, default=0.0)
    s.set_defaults(func=cmd_scan)

    s = sub.add_parser("decohere", parents=[common], help="identity-sequence decoherence comparison")
    s.add_argument("--points", type=int, default=6)
    s.set_defaults(func=cmd_decohere)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve_config(args)
        return args.func(cfg, args)
    except (ValueError, NoiseConfigError, OSError) as e:
        sys.stderr.write(f"tcgsim {args.command}: error: {e}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
