"""Boundary curves Phi(R + i eps) for both examples, with crossing counts and verdicts.

Usage: python3 scripts/reproduce_figures.py [out_dir]
Writes one two-column table (Re, Im) per profile and epsilon.
"""
import sys
from pathlib import Path

from tripledeck.cli import write_table
from tripledeck.criterion import boundary_point, count_crossings, n_pm_from_g, sample_boundary_curve
from tripledeck.profiles import make_profile


def main(out: Path):
    out.mkdir(parents=True, exist_ok=True)
    for name in ("example1", "example2"):
        p = make_profile(name)
        v = n_pm_from_g(p)
        print(f"{name}: n+ = {v.n_plus}, n- = {v.n_minus}, unstable = {v.unstable}")
        for eps in (0.1, 0.05, 0.01):
            c = sample_boundary_curve(p, eps, (-10.0, 50.0), 400)
            below, above, _ = count_crossings(c, evaluator=lambda a: boundary_point(p, a, eps))
            write_table(out / f"{name}-eps{eps:g}.txt", [c.values.real, c.values.imag])
            print(f"  eps = {eps:<5g} crossings from below {below}, from above {above}")


if __name__ == "__main__":
    main(Path(sys.argv[1] if len(sys.argv) > 1 else "out/figures"))
