"""Detector inefficiency, modeled as a beam splitter in front of a perfect detector.

Finds the smallest efficiency still giving |B| >= 2.001 for the odd ECS with
on-off detection.  Takes a few minutes: each bisection step is a full
multi-start optimization.

Run: python3 demos/03_detector_efficiency.py
"""

from ecsbell import ChannelParams, OptimizationProblem, maximize_bell
from ecsbell.scenarios import efficiency_threshold

c = ChannelParams(0.75, 1.0)
for mode in ("symmetric_free", "asymmetric_free"):
    res = maximize_bell(OptimizationProblem("onoff", "odd", c, amplitudes=mode))
    print(f"(eta1, eta2) = (0.75, 1), {mode}: {res.value:.4f}")

for mode in ("symmetric_free", "asymmetric_free"):
    eta = efficiency_threshold("onoff", "odd", mode, 2.001)
    print(f"{mode}: |B| >= 2.001 needs eta >= {eta:.4f}")
