"""Lossless Bell-CHSH optima for displaced on-off and parity measurements.

Run: python3 demos/01_ideal_measurements.py
"""

from ecsbell import OptimizationProblem, maximize_bell

# Free amplitudes: the optimizer picks alpha1, alpha2 and all four displacements.
# Parity optima run into the amplitude bound (4 by default): their supremum is
# only approached as alpha grows without limit.
for kind in ("onoff", "parity"):
    for parity in ("even", "odd"):
        res = maximize_bell(OptimizationProblem(kind, parity))
        print(f"{kind:6s} {parity:4s}  |B|max = {res.value:.4f}  at alpha = ({res.alpha1:.3f}, {res.alpha2:.3f})")

# With on-off detection an asymmetric state does better at fixed photon number.
# The odd state with nbar = 2.24 is the clearest case.
asym = maximize_bell(OptimizationProblem("onoff", "odd", amplitudes="fixed_nbar", nbar=2.24))
sym = maximize_bell(OptimizationProblem("onoff", "odd", amplitudes="fixed_nbar_symmetric", nbar=2.24))
print()
print(f"nbar = 2.24, odd, on-off: asymmetric {asym.value:.4f} at ({asym.alpha1:.3f}, {asym.alpha2:.3f})")
print(f"                         symmetric  {sym.value:.4f} at ({sym.alpha1:.3f}, {sym.alpha2:.3f})")

# The parity measurement has no such preference; its optimum keeps alpha1 = alpha2
# and climbs toward 2*sqrt(2) as the photon number grows.
for nbar in (1.0, 2.0, 4.0):
    a = maximize_bell(OptimizationProblem("parity", "even", amplitudes="fixed_nbar", nbar=nbar))
    s = maximize_bell(OptimizationProblem("parity", "even", amplitudes="fixed_nbar_symmetric", nbar=nbar))
    print(f"parity even nbar={nbar}: asymmetric {a.value:.4f}, symmetric {s.value:.4f}")
