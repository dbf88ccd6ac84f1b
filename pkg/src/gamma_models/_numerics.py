"""Small numerical helpers shared across modules."""

import os

import numpy as np

EPS = np.finfo(float).eps


def as_matrix(a, name="matrix"):
    a = np.asarray(a, dtype=complex)
    if a.ndim == 0:
        a = a.reshape(1, 1)
    if a.ndim != 2:
        raise ValueError(f"{name} must be 2-dimensional, got shape {a.shape}")
    return a


def herm(a):
    if hasattr(a, "tocsr"):  # scipy sparse
        return a.conj().T
    return np.conj(np.swapaxes(a, -1, -2))


def cluster_groups(values, scale=1.0, cap=None):
    """Group nearly-coincident complex values that look like one perturbed multiple root.

    A k-fold cluster C of roots of a degree-m polynomial with coefficients of
    size about prod(scale + |z_j|) moves by roughly
    (eps * prod_j (scale + |z_j|) / prod_{j not in C} |c - z_j|)**(1/k)
    under rounding, c being the cluster centre; nearby outside roots widen it.
    Candidate groups are a point and its k-1 nearest unassigned neighbours,
    tried from the largest k down, and accepted when their diameter stays
    below ten times that radius (and below ``cap`` when given).
    """
    values = np.asarray(values, dtype=complex)
    m = values.size
    scale = max(float(scale), 1.0)
    log_coeff = float(np.sum(np.log(scale + np.abs(values))))
    free = np.ones(m, dtype=bool)
    groups = []
    for k in range(m, 1, -1):
        for i in range(m):
            if not free[i] or free.sum() < k:
                continue
            idx = np.flatnonzero(free)
            near = idx[np.argsort(np.abs(values[idx] - values[i]))[:k]]
            v = values[near]
            c = v.mean()
            rest = np.delete(values, near)
            gaps = np.abs(c - rest)
            if np.any(gaps == 0):
                continue
            allowed = 10.0 * np.exp((np.log(EPS) + log_coeff - np.sum(np.log(gaps))) / k)
            if cap is not None:
                allowed = min(allowed, cap)
            if np.max(np.abs(v[:, None] - v[None, :])) <= allowed:
                groups.append(sorted(near.tolist()))
                free[near] = False
    groups.extend([i] for i in np.flatnonzero(free))
    return groups


def cluster_mean(values, scale=1.0, cap=None):
    """Replace each cluster of a perturbed multiple root by the cluster mean."""
    values = np.asarray(values, dtype=complex).copy()
    for g in cluster_groups(values, scale, cap):
        values[g] = values[g].mean()
    return values


def max_workers():
    """Parallelism cap read from GAMMA_MODELS_THREADS (default 1)."""
    try:
        return max(1, int(os.environ.get("GAMMA_MODELS_THREADS", "1")))
    except ValueError:
        return 1
