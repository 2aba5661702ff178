"""Shared test fixtures and reference values."""

import numpy as np

# Characterized per-cell parameters of the reference device at maximum
# in-cell capacitance: (cell, L henries, R ohms, kappa0 A^2/Hz, C farads).
CHARACTERIZED_CELLS = {
    7: (1.77e-6, 76.7, 0.206e-12, 6.77e-9),
    6: (2.22e-6, 94.6, 0.0632e-12, 6.14e-9),
    5: (1.48e-6, 63.3, 0.0738e-12, 6.22e-9),
    4: (1.32e-6, 30.5, 0.114e-12, 6.44e-9),
    3: (1.29e-6, 43.7, 0.0631e-12, 6.21e-9),
    2: (1.19e-6, 34.8, 0.0448e-12, 6.71e-9),
    1: (0.989e-6, 30.7, 0.0660e-12, 6.44e-9),
    0: (0.918e-6, 26.9, 0.0697e-12, 6.40e-9),
}


def random_psd_matrix(d: int, seed: int, lo: float = 0.5, hi: float = 2.0) -> np.ndarray:
    """Random symmetric positive-definite matrix with eigenvalues in [lo, hi]."""
    rng = np.random.default_rng(seed)
    q = np.linalg.qr(rng.standard_normal((d, d)))[0]
    m = q @ np.diag(rng.uniform(lo, hi, d)) @ q.T
    return 0.5 * (m + m.T)
