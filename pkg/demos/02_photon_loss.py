"""How to distribute a fixed amount of photon loss.

Strategy A loses photons from both modes for a normalized time r; strategy B
keeps mode 1 intact and lets mode 2 decay for twice as long.  At the same r,
B comes out ahead once r is more than a few percent.

Run: python3 demos/02_photon_loss.py
"""

import numpy as np

from ecsbell import OptimizationProblem, maximize_bell, strategy_channel

print("on-off, odd ECS")
print("   r    A        B")
for r in np.arange(0.0, 0.41, 0.1):
    vals = []
    for strategy in "AB":
        res = maximize_bell(OptimizationProblem("onoff", "odd", strategy_channel(strategy, r), starts=32))
        vals.append(res.value)
    print(f"  {r:.1f}  {vals[0]:.4f}  {vals[1]:.4f}")

# Parity measurement under strategy B: a large intact mode 1 keeps the violation alive.
for alpha1 in (1.0, 2.0, 3.0):
    res = maximize_bell(
        OptimizationProblem(
            "parity", "even", strategy_channel("B", 0.1), amplitudes="pinned_alpha1", alpha1=alpha1
        )
    )
    print(f"parity even, B, r=0.1, alpha1={alpha1}: {res.value:.4f} (alpha2 = {res.alpha2:.3f})")
