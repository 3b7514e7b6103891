#!/usr/bin/env python3
"""Reference K_nu(z) values at 30 digits (mpmath) for the full-range accuracy test."""
import mpmath as mp

mp.mp.dps = 30
nus = [k * 0.5 for k in range(21)] + [0.3, 1.7, 3.3, 7.1, 9.9]
zs = [1e-6 * (50.0 / 1e-6) ** (i / 44) for i in range(45)]
with open("tests/data/besselk_reference.csv", "w") as out:
    out.write("nu,z,k\n")
    for nu in nus:
        for z in zs:
            out.write(f"{nu!r},{z!r},{mp.nstr(mp.besselk(nu, z), 20)}\n")
