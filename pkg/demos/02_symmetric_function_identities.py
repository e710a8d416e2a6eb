"""The algebra that powers the flows: normalized symmetric functions.

E_k = sigma_k / C(n,k) and its derivative tensor satisfy three exact trace
identities; the Newton-MacLaurin inequality controls the quotient
F = E_k / E_{k-1} inside the Garding cone.
"""

import numpy as np

from curvelab import (
    curvature_quotient,
    ek_derivative_tensor,
    elementary_symmetric,
    gamma_cone_member,
    newton_maclaurin_gap,
)

rng = np.random.default_rng(0)

kappa = np.array([1.0, 2.0, 3.0])
print("kappa = (1, 2, 3), n = 3")
print("  E_1 = %.6f, E_2 = %.6f, E_3 = %.6f"
      % tuple(elementary_symmetric(kappa, k) for k in (1, 2, 3)))
print("  F = E_2/E_1 = %.6f (11/6 = %.6f)" % (curvature_quotient(kappa, 2), 11 / 6))

# trace identities for a random symmetric operator in the cone
n, k = 4, 2
q, _ = np.linalg.qr(rng.standard_normal((n, n)))
eigs = rng.uniform(0.2, 2.0, n)
a = (q * eigs) @ q.T
a = 0.5 * (a + a.T)
d = ek_derivative_tensor(a, k)
e = [elementary_symmetric(np.sort(eigs), j) for j in range(n + 2)]
print("\nrandom symmetric operator, n = 4, k = 2:")
print("  tr(dE_k)        = %.12f  vs k E_(k-1)            = %.12f" % (np.trace(d), k * e[k - 1]))
print("  tr(dE_k A)      = %.12f  vs k E_k                = %.12f" % (np.sum(d * a), k * e[k]))
print("  tr(dE_k A^2)    = %.12f  vs n E_1 E_k - (n-k)E_3 = %.12f"
      % (np.sum(d * (a @ a)), n * e[1] * e[k] - (n - k) * e[k + 1]))

# Newton-MacLaurin: zero exactly on constant vectors, positive otherwise
print("\nNewton-MacLaurin gaps E_k E_m - E_(m+1) E_(k-1):")
print("  constant kappa (2,2,2,2): gap = %.2e" % newton_maclaurin_gap(np.full(4, 2.0), 1, 2))
print("  kappa = (1,2,3,4):        gap = %.6f" % newton_maclaurin_gap(np.arange(1.0, 5.0), 1, 2))

# the cone boundary
print("\nGarding cone membership:")
for kap in ([1.0, 1.0], [3.0, -1.0], [0.0, 0.0]):
    inside = [gamma_cone_member(np.array(kap), j) for j in (1, 2)]
    print("  kappa = %-12s in Gamma_1: %-5s in Gamma_2: %s" % (kap, inside[0], inside[1]))
