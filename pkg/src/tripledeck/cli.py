"""Command-line front end.

    tripledeck curve        --profile example2 --epsilon 0.1 0.05 --out out/
    tripledeck analyze      --profile example2 --k 100 1000
    tripledeck couette-check --k 100 1000 10000
    tripledeck convergence  --profile example2 --k 100 1000 10000
    tripledeck finite-k     --profile example2 --k 1000 --mu 2.62+0.68j

Exit codes: 0 success, 2 indeterminate criterion, 3 numerical failure,
4 bad input.  Outputs carry the tool version and a hash of the run
configuration and contain no timestamps, so reruns are byte-identical.
"""
from __future__ import annotations

import argparse
import dataclasses
import hashlib
import json
import math
import os
import re
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from . import couette as cq
from .criterion import (AmbiguousCrossingError, MarginalCriterionError, NearZeroContourError,
                        boundary_point, contour_winding, count_crossings, crossings_match_zeros,
                        far_radius, n_pm_from_g, sample_boundary_curve)
from .finitek import SolverConfig, convergence_study, growth_rate_floor, solve_os_mu, track_mu_k
from .phi_infinity import phi_infinity
from .profiles import ProfileError, make_profile
from .quadrature import QuadratureConfig
from .rootfind import find_roots

EXIT_OK, EXIT_INDETERMINATE, EXIT_NUMERICAL, EXIT_BAD_INPUT = 0, 2, 3, 4


class BadInput(ValueError):
    pass


@dataclass
class RunConfig:
    profile_spec: str = "example2"
    epsilon_list: list = field(default_factory=lambda: [0.1, 0.05, 0.01])
    a_range: tuple = (-10.0, 50.0)
    n_samples: int = 400
    k_list: list = field(default_factory=lambda: [100.0, 1000.0])
    rel_tol: float = 1e-10
    z_max: float | None = None
    mu: complex | None = None
    output_dir: str = "."
    seed: int = 0

    def validate(self):
        if self.rel_tol <= 0:
            raise BadInput("tolerance must be positive")
        eps = list(self.epsilon_list)
        if not eps or any(e <= 0 for e in eps) or any(b >= a for a, b in zip(eps, eps[1:])):
            raise BadInput("epsilon list must be positive and strictly decreasing")
        if not self.a_range[0] < self.a_range[1]:
            raise BadInput("a-min must be below a-max")
        if self.n_samples < 2:
            raise BadInput("need at least two samples")
        if any(k == 0 for k in self.k_list):
            raise BadInput("k must be nonzero")
        if self.z_max is not None and self.z_max <= 0:
            raise BadInput("zmax must be positive")
        return self

    def to_json(self) -> dict:
        d = dataclasses.asdict(self)
        d["a_range"] = list(self.a_range)
        d["mu"] = None if self.mu is None else [self.mu.real, self.mu.imag]
        del d["output_dir"]  # where results go does not change them
        return d

    @property
    def hash(self) -> str:
        blob = json.dumps(self.to_json(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]

    @property
    def quadrature(self) -> QuadratureConfig:
        return QuadratureConfig(rel_tol=self.rel_tol)

    @property
    def solver(self) -> SolverConfig:
        return SolverConfig(z_max=self.z_max)


def _cpx(v: complex) -> list:
    return [float(v.real), float(v.imag)]


def provenance(cfg: RunConfig) -> dict:
    return {"tool": "tripledeck", "version": __version__, "config_hash": cfg.hash, "config": cfg.to_json()}


def file_stem(spec: str) -> str:
    return re.sub(r"[^A-Za-z0-9_.-]+", "_", spec).strip("_") or "profile"


def write_json(path: Path, obj) -> None:
    with open(path, "w", newline="\n") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_table(path: Path, columns) -> None:
    cols = [np.asarray(c, dtype=float) for c in columns]
    with open(path, "w", newline="\n") as fh:
        for row in zip(*cols):
            fh.write(" ".join("%.12e" % x for x in row) + "\n")


def _prepare_output(cfg: RunConfig) -> Path:
    out = Path(cfg.output_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise BadInput(f"cannot create output directory {out}: {exc}") from exc
    if not os.access(out, os.W_OK):
        raise BadInput(f"output directory {out} is not writable")
    return out


def _profile(cfg: RunConfig):
    try:
        return make_profile(cfg.profile_spec)
    except (ProfileError, ValueError) as exc:
        raise BadInput(str(exc)) from exc


# -- commands ------------------------------------------------------------------

def cmd_curve(cfg: RunConfig) -> dict:
    out = _prepare_output(cfg)
    p = _profile(cfg)
    stem = file_stem(cfg.profile_spec)
    summary = {"profile": cfg.profile_spec, "curves": [], "provenance": provenance(cfg)}
    for i, eps in enumerate(cfg.epsilon_list, start=1):
        curve = sample_boundary_curve(p, eps, tuple(cfg.a_range), cfg.n_samples, cfg.quadrature)
        below, above, recs = count_crossings(curve, evaluator=lambda a, e=eps: boundary_point(p, a, e, cfg.quadrature))
        name = f"{stem}-offset{i}.txt"
        write_table(out / name, [curve.values.real, curve.values.imag])
        summary["curves"].append({
            "file": name, "epsilon": eps, "samples": len(curve), "failed_nodes": list(curve.failed),
            "from_below": below, "from_above": above, "net": below - above,
            "crossings": [{"a": r.param_at_crossing, "direction": r.direction.value,
                           "real_part": r.real_part_at_crossing} for r in recs]})
    write_json(out / f"{stem}-curve.json", summary)
    return summary


def cmd_analyze(cfg: RunConfig) -> dict:
    out = _prepare_output(cfg)
    p = _profile(cfg)
    q = cfg.quadrature
    verdict = n_pm_from_g(p, q)
    eps = cfg.epsilon_list[-1]
    R = far_radius(p, cfg=q)
    w, below, above, _, _ = contour_winding(p, eps, R, cfg=q)
    verdict.winding_number = w
    verdict.epsilon_used = eps
    edge = sample_boundary_curve(p, 0.0, (1e-3, max(cfg.a_range[1], 1.0)), cfg.n_samples, q)
    _, _, edge_recs = count_crossings(edge, evaluator=lambda a: boundary_point(p, a, 0.0, q))
    roots = find_roots(lambda m: phi_infinity(p, m, q), (complex(1e-3, eps), complex(R, R)), tol=1e-12)
    record = {
        "profile": cfg.profile_spec,
        "verdict": {"n_plus": verdict.n_plus, "n_minus": verdict.n_minus, "winding_number": w,
                    "contour_from_below": below, "contour_from_above": above,
                    "unstable": verdict.unstable, "epsilon_used": eps, "contour_radius": R,
                    "g_zeros": [{"a": a, "monotonicity": d, "pv_test_value": v} for a, d, v in verdict.zeros],
                    "edge_crossings_match_g_zeros": crossings_match_zeros(p, verdict, edge, edge_recs)},
        "roots": [_cpx(r) for r, _ in roots],
        "mu_k_track": [],
        "provenance": provenance(cfg),
    }
    if verdict.unstable and roots and cfg.k_list:
        mu_inf = max((r for r, _ in roots), key=lambda r: r.imag)
        track = track_mu_k(p, mu_inf, [abs(k) for k in cfg.k_list], cfg=cfg.solver)
        record["mu_k_track"] = [{"k": t.k, "mu_k": None if t.mu_k is None else _cpx(t.mu_k), "error": t.error}
                                for t in track]
        record["sigma_m_estimate"] = growth_rate_floor(track)
    write_json(out / f"{file_stem(cfg.profile_spec)}-verdict.json", record)
    return record


def cmd_couette_check(cfg: RunConfig) -> dict:
    out = _prepare_output(cfg)
    ks = [abs(k) for k in cfg.k_list]
    roots = cq.scan_unstable_roots(ks)
    zeros = cq.anti_zeros(15.0, 10)
    t0 = cq.airy(0)
    report = {
        "k_list": ks,
        "unstable_roots": [{"k": r.k, "eta": _cpx(r.eta), "lambda": _cpx(r.lam), "regime": r.regime.value,
                            "residual": r.residual} for r in roots],
        "max_re_lambda": max((r.lam.real for r in roots), default=None),
        "verdict": "no unbounded growth rates" if not roots else "unstable roots found",
        "airy_identities": {
            "Ai(0)": t0.ai.real, "Ai(0,-1)": t0.ai_deriv.real, "Ai(0,1)": t0.ai_anti.real,
            "ratio": (t0.ai_anti / t0.ai_deriv).real, "3^(-2/3) Gamma(1/3)": cq.ZERO_RATIO,
            "a(1)": cq.a_coefficient(1), "a(-1)": cq.a_coefficient(-1)},
        "anti_zeros": [{"z": _cpx(z), "abs_arg_over_pi": abs(math.atan2(z.imag, z.real)) / math.pi} for z in zeros],
        "regimes": {str(x): cq.classify(x).value for x in (0.01, 1.0, 50.0)},
        "provenance": provenance(cfg),
    }
    write_json(out / "couette-check.json", report)
    return report


def _unstable_root(p, cfg: RunConfig) -> complex:
    if cfg.mu is not None:
        return cfg.mu
    q = cfg.quadrature
    R = far_radius(p, cfg=q)
    roots = find_roots(lambda m: phi_infinity(p, m, q), (complex(1e-3, cfg.epsilon_list[-1]), complex(R, R)),
                       tol=1e-12)
    if not roots:
        raise BadInput("profile has no unstable root of Phi; convergence needs one")
    return max((r for r, _ in roots), key=lambda r: r.imag)


def cmd_convergence(cfg: RunConfig) -> dict:
    out = _prepare_output(cfg)
    p = _profile(cfg)
    mu = _unstable_root(p, cfg)
    study = convergence_study(p, mu, [abs(k) for k in cfg.k_list], cfg.solver)
    stem = file_stem(cfg.profile_spec)
    write_table(out / f"{stem}-convergence.txt", [study.k_values, study.differences])
    rec = {"profile": cfg.profile_spec, "mu": _cpx(study.mu), "phi_inf": _cpx(study.phi_inf_value),
           "k_values": study.k_values.tolist(), "phi_k": [_cpx(v) for v in study.phi_k_values],
           "differences": study.differences.tolist(), "fitted_slope": study.fitted_slope,
           "eventually_decreasing": study.eventually_decreasing(), "provenance": provenance(cfg)}
    write_json(out / f"{stem}-convergence.json", rec)
    return rec


def cmd_finite_k(cfg: RunConfig) -> dict:
    out = _prepare_output(cfg)
    p = _profile(cfg)
    mu = cfg.mu if cfg.mu is not None else complex(1.0, 1.0)
    stem = file_stem(cfg.profile_spec)
    recs = []
    for k in cfg.k_list:
        sol = solve_os_mu(p, mu, k, z_max=cfg.z_max)
        name = f"{stem}-finitek-k{k:g}.txt"
        write_table(out / name, [sol.grid, sol.phi.real, sol.phi.imag])
        recs.append({"k": k, "file": name, "phi0": _cpx(sol.phi0), "bc_residuals": list(map(float, sol.bc_residuals)),
                     "interior_residual": sol.interior_residual, "truncation_estimate": sol.truncation_estimate,
                     "condition_estimate": sol.condition, "nodes": len(sol.grid)})
    rec = {"profile": cfg.profile_spec, "mu": _cpx(mu), "solves": recs, "provenance": provenance(cfg)}
    write_json(out / f"{stem}-finitek.json", rec)
    return rec


COMMANDS = {"curve": cmd_curve, "analyze": cmd_analyze, "couette-check": cmd_couette_check,
            "convergence": cmd_convergence, "finite-k": cmd_finite_k}


# -- argument handling -----------------------------------------------------------

def read_config_file(path: str) -> dict:
    """key = value lines; '#' starts a comment; lists are whitespace or comma separated."""
    out = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise BadInput(f"cannot read config {path}: {exc}") from exc
    for n, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise BadInput(f"{path}:{n}: expected key = value")
        key, val = (s.strip() for s in line.split("=", 1))
        out[key.replace("-", "_")] = val
    return out


def _floats(v) -> list:
    if isinstance(v, str):
        v = v.replace(",", " ").split()
    return [float(x) for x in v]


def _complex(v) -> complex:
    return complex(str(v).replace(" ", "").replace("i", "j"))


def build_config(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig()
    flag_values = {
        "profile": args.profile, "epsilon": args.epsilon, "a_min": args.a_min, "a_max": args.a_max,
        "samples": args.samples, "k": args.k, "zmax": args.zmax, "tol": args.tol, "out": args.out,
        "mu": args.mu, "seed": args.seed,
    }
    values = {k: v for k, v in flag_values.items() if v is not None}
    if args.config:
        # the config file overrides flags
        values.update(read_config_file(args.config))
    a_lo, a_hi = cfg.a_range
    try:
        for key, val in values.items():
            if key == "profile":
                cfg.profile_spec = str(val)
            elif key == "epsilon":
                cfg.epsilon_list = _floats(val)
            elif key == "a_min":
                a_lo = float(val)
            elif key == "a_max":
                a_hi = float(val)
            elif key == "samples":
                cfg.n_samples = int(val)
            elif key == "k":
                cfg.k_list = _floats(val)
            elif key == "zmax":
                cfg.z_max = float(val)
            elif key == "tol":
                cfg.rel_tol = float(val)
            elif key == "out":
                cfg.output_dir = str(val)
            elif key == "mu":
                cfg.mu = _complex(val)
            elif key == "seed":
                cfg.seed = int(val)
            else:
                raise BadInput(f"unknown config key {key!r}")
    except (TypeError, ValueError) as exc:
        if isinstance(exc, BadInput):
            raise
        raise BadInput(str(exc)) from exc
    cfg.a_range = (a_lo, a_hi)
    return cfg.validate()


def parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="tripledeck", description="Spectral stability of shear profiles.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--profile", help="couette | example1 | example2 | parametric:A,m,c,e,a,...")
        sp.add_argument("--epsilon", nargs="+", type=float, help="offsets above the real axis, decreasing")
        sp.add_argument("--a-min", dest="a_min", type=float)
        sp.add_argument("--a-max", dest="a_max", type=float)
        sp.add_argument("--samples", type=int)
        sp.add_argument("--k", nargs="+", type=float, help="wavenumbers")
        sp.add_argument("--zmax", type=float)
        sp.add_argument("--tol", type=float, help="relative quadrature tolerance")
        sp.add_argument("--mu", type=str, help="spectral parameter, e.g. 2.6+0.7j")
        sp.add_argument("--seed", type=int)
        sp.add_argument("--out", help="output directory")
        sp.add_argument("--config", help="key = value file overriding flags")
    return ap


def main(argv=None) -> int:
    ap = parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_BAD_INPUT
    try:
        cfg = build_config(args)
        result = COMMANDS[args.command](cfg)
    except BadInput as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT
    except (MarginalCriterionError, AmbiguousCrossingError, NearZeroContourError) as exc:
        print(f"indeterminate: {exc}", file=sys.stderr)
        return EXIT_INDETERMINATE
    except ArithmeticError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT
    print(json.dumps({"command": args.command, "config_hash": cfg.hash,
                      **({"unstable": result["verdict"]["unstable"]} if "verdict" in result
                         and isinstance(result["verdict"], dict) else {})}, sort_keys=True))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
