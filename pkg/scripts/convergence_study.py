#!/usr/bin/env python3
"""Grid-refinement study of the momentum flux balance on the free rod.

Prints the max balance residual |d/dt P - boundary traction| per grid and
the rate between successive refinements (expect ~second order).
"""
import math

import numpy as np

from nlelast import KernelSpec, MaterialModel, ScenarioConfig, run


def main():
    prev = None
    print(f"{'N':>5} {'max |balance|':>15} {'rate':>7}")
    for n in (32, 64, 128, 256):
        cfg = ScenarioConfig(
            dim=1, counts=(n,), lengths=(1.0,),
            material=MaterialModel(rho=1.0, e_modulus=1.0),
            kernel=KernelSpec("exponential", amplitude=1.0, horizon=0.2),
            preset="gaussian_pulse", preset_params={"amplitude": [1e-3], "width": 0.125},
            bc={}, dt=0.9 * 0.5 / n, steps=2000, sample_every=20,
        )
        _, series = run(cfg)
        worst = float(np.nanmax(np.abs(series.column("bal_p_x"))))
        rate = "" if prev is None else f"{math.log2(prev / worst):6.2f}"
        print(f"{n:>5} {worst:>15.6e} {rate:>7}")
        prev = worst


if __name__ == "__main__":
    main()
