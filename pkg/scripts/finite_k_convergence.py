"""|Phi_k(mu_inf) - Phi(mu_inf)| over k for example2, plus tracking of mu_k.

Usage: python3 scripts/finite_k_convergence.py
"""
import time

from tripledeck.criterion import far_radius
from tripledeck.finitek import convergence_study, growth_rate_floor, track_mu_k
from tripledeck.phi_infinity import phi_infinity
from tripledeck.profiles import example2
from tripledeck.rootfind import find_roots


def main():
    p = example2()
    R = far_radius(p)
    roots = find_roots(lambda m: phi_infinity(p, m), (complex(1e-3, 0.01), complex(R, R)), tol=1e-12)
    mu = max((r for r, _ in roots), key=lambda r: r.imag)
    print(f"mu_inf = {mu:.12f}")
    t0 = time.perf_counter()
    st = convergence_study(p, mu, [1e2, 3e2, 1e3, 3e3, 1e4, 1e5])
    for k, d in zip(st.k_values, st.differences):
        print(f"  k = {k:8.0e}  |Phi_k - Phi| = {d:.3e}")
    print(f"fitted slope {st.fitted_slope:.3f} ({time.perf_counter() - t0:.1f} s)")
    tr = track_mu_k(p, mu, [1e2, 1e3, 1e4, 1e5])
    for t in tr:
        print(f"  k = {t.k:8.0e}  mu_k = {t.mu_k}" + (f"  ({t.error})" if t.error else ""))
    print(f"sigma_m estimate (min Im mu_k) = {growth_rate_floor(tr):.4f}")


if __name__ == "__main__":
    main()
