"""Cyclic Jacobi eigendecomposition, the dense oracle for eigensolver tests.

Independent of the package's power iteration: classic two-sided Givens
sweeps over all (p, q) pairs until the off-diagonal mass is negligible.
Intended for small symmetric matrices (n <= 16).
"""

import math

import numpy as np


def jacobi_eigh(matrix, sweeps=50, tol=1e-14):
    """All eigenvalues (descending |.|) and eigenvectors of a symmetric matrix.

    Returns (eigenvalues, eigenvectors) with eigenvectors[:, i] the unit
    eigenvector for eigenvalues[i].
    """
    a = np.array(matrix, dtype=float)
    n = a.shape[0]
    assert a.shape == (n, n) and np.allclose(a, a.T, atol=1e-12)
    v = np.eye(n)
    scale = np.linalg.norm(a)
    if scale == 0.0:
        return np.zeros(n), v

    for _ in range(sweeps):
        # off-diagonal mass measured entrywise; total-minus-diagonal cancels
        off = math.sqrt(2.0 * np.sum(np.triu(a, 1) ** 2))
        if off <= tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) <= 1e-300:
                    continue
                # Givens rotation zeroing a[p, q]
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                if abs(theta) > 1e8:
                    t = 1.0 / (2.0 * theta)  # asymptotic small-angle branch
                else:
                    t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(1.0 + theta * theta))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = t * c
                rot_p = c * a[:, p] - s * a[:, q]
                rot_q = s * a[:, p] + c * a[:, q]
                a[:, p], a[:, q] = rot_p, rot_q
                rot_p = c * a[p, :] - s * a[q, :]
                rot_q = s * a[p, :] + c * a[q, :]
                a[p, :], a[q, :] = rot_p, rot_q
                rot_p = c * v[:, p] - s * v[:, q]
                rot_q = s * v[:, p] + c * v[:, q]
                v[:, p], v[:, q] = rot_p, rot_q

    eigenvalues = np.diag(a).copy()
    order = np.argsort(-np.abs(eigenvalues))
    return eigenvalues[order], v[:, order]
