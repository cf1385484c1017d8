"""Couette dispersion relation: Airy identities, unstable-root scan, zeros of Ai(., 1).

Usage: python3 scripts/couette_check.py
"""
import math

import numpy as np

from tripledeck.couette import ZERO_RATIO, airy, anti_zeros, scan_unstable_roots


def main():
    t = airy(0)
    print(f"Ai(0,1)/Ai(0,-1) = {(t.ai_anti / t.ai_deriv).real:.15f}  (3^(-2/3) Gamma(1/3) = {ZERO_RATIO:.15f})")
    for k in (1e2, 1e3, 1e4):
        print(f"k = {k:.0e}: roots with Re lambda > 10: {len(scan_unstable_roots([k]))}")
    for z in anti_zeros(count=10):
        print(f"  zero {z:.10f}  |arg|/pi = {abs(math.atan2(z.imag, z.real)) / np.pi:.4f}")


if __name__ == "__main__":
    main()
