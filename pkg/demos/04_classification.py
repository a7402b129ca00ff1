"""Metric / symplectic classification of forced systems.

The evolution connection of a forced system is metric exactly when
dsigma_i/dy_j is antisymmetric and symplectic exactly when it is
symmetric.  Liouville-family forces make it symplectic but (except over
a (-1)-homogeneous metric) not metric; the dissipativity verdict flips
with the sign of the force coefficient.
"""

from lagmech import classify, instantiate, standard_samples

CASES = [
    ("free Riemannian base", "SYS-B", {}),
    ("Liouville force over the flat base", "SYS-E", {"e": -1.0, "base": "EUCLID"}),
    ("Liouville force over the Finsler base", "SYS-E", {"e": -1.0, "base": "SYS-C"}),
    ("normalized Liouville force, e = -0.5", "SYS-D", {"e": -0.5}),
    ("normalized Liouville force, e = +0.5", "SYS-D", {"e": 0.5}),
]

print(f"{'case':42s} {'metric':>7s} {'sympl.':>7s} {'dissipative':>12s} {'worst power':>12s}")
for label, builtin, params in CASES:
    sys_ = instantiate(builtin, params)
    samples = standard_samples(builtin, params, count=60)
    rep = classify(sys_, samples)
    d = rep.dissipative_at_samples
    print(f"{label:42s} {str(rep.is_metric):>7s} {str(rep.is_symplectic):>7s} "
          f"{d['verdict']:>12s} {d['worst_power']:>12.4e}")

print("\ndefects are scaled by 1 + max|g| and compared to 1e-8;")
print("the free system is both metric and symplectic (the canonical pair),")
print("every Liouville-type force stays symplectic, and only e < 0 dissipates.")
