"""Closed-form reference values used across the test suite.

Harmonic system: ``J y' = (P + lam W) y`` with ``P = diag(0, 1)`` and
``W = diag(1, 0)`` is ``u' = v, v' = -lam u``. With the lambda = 0 frame
used for bracket coordinates, the characteristic functions are

* Dirichlet on [0, pi]:   Gamma(lam) = -sin(pi k) / k,           k = sqrt(lam)
* periodic on [0, 2 pi]:  Gamma(lam) = 2 - 2 cos(2 pi k)

Discrete chain (A = 0, B = 1, C = 0, W1 = 1, W2 = 0) on the window [0, K-1]
with u(0) = u(K) = 0 has eigenvalues 2 - 2 cos(j pi / K), j = 1 .. K-1.
"""

import numpy as np
from scipy.integrate import quad

P_HARMONIC = np.diag([0.0, 1.0])
W_HARMONIC = np.diag([1.0, 0.0])


def harmonic_frame(lam, t):
    """Exact Y(t) with Y(0) = I for the harmonic system."""
    k = np.sqrt(complex(lam))
    if k == 0:
        return np.array([[1.0, t], [0.0, 1.0]], dtype=complex)
    return np.array(
        [[np.cos(k * t), np.sin(k * t) / k], [-k * np.sin(k * t), np.cos(k * t)]], dtype=complex
    )


def gamma_dirichlet(lam):
    k = np.sqrt(complex(lam))
    return -np.pi if k == 0 else -np.sin(np.pi * k) / k


def dgamma_dirichlet(lam):
    """d/dlam of -sin(pi k)/k."""
    k = np.sqrt(complex(lam))
    dk = 1 / (2 * k)
    return -(np.pi * np.cos(np.pi * k) / k - np.sin(np.pi * k) / k ** 2) * dk


def gamma_periodic(lam):
    return 2 - 2 * np.cos(2 * np.pi * np.sqrt(complex(lam)))


def d2gamma_periodic(lam):
    """Second derivative of 2 - 2 cos(2 pi sqrt(lam))."""
    k = np.sqrt(complex(lam))
    a = 2 * np.pi
    # d/dlam = 2 a sin(a k) / (2 k) = a sin(a k) / k
    # d2/dlam2 = a [a cos(a k) / k - sin(a k) / k^2] / (2 k)
    return a * (a * np.cos(a * k) / k - np.sin(a * k) / k ** 2) / (2 * k)


def chain_eigenvalues(K):
    return np.array([2 - 2 * np.cos(j * np.pi / K) for j in range(1, K)])


def dlambda_norm_dirichlet_at_one():
    """Weighted norm of d/dlam [sin(sqrt(lam) t)/sqrt(lam)] at lam = 1 on [0, pi]."""
    val, _ = quad(lambda t: ((t * np.cos(t) - np.sin(t)) / 2) ** 2, 0, np.pi, epsabs=1e-14)
    return np.sqrt(val)


def periodic_chain_eigenvalues(K):
    """y(0) = y(K) for the chain: 2 - 2 cos(2 pi j / K), j = 0 .. K-1."""
    return np.sort(np.array([2 - 2 * np.cos(2 * np.pi * j / K) for j in range(K)]))
