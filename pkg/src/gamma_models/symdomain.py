"""Geometry of the symmetrized polydisc.

Points of the symmetrized polydisc are stored in symmetrized coordinates
``(s_1, ..., s_n)``. Membership is decided by the roots of
``q(t) = t^n - s_1 t^(n-1) + ... + (-1)^n s_n``: the point lies in the
closed set iff all roots lie in the closed unit disc, in the open set iff
all lie in the open disc, and on the distinguished boundary iff all are
unimodular.
"""

from dataclasses import dataclass, field
from itertools import product
from typing import Literal

import numpy as np

from ._numerics import cluster_mean
from .errors import NonFiniteInput, SampleBudgetExceeded

Region = Literal["Gamma_n", "G_n", "bGamma_n"]

SAMPLE_BUDGET = 2_000_000
DEFAULT_TOL = 1e-8


@dataclass
class DomainSample:
    points: np.ndarray  # (m, n) symmetrized coordinates
    source: str  # torus-grid | torus-random | polydisc-random
    density: int
    angles: np.ndarray = field(default=None, repr=False)  # (m, n) preimage angles on the torus


def _check_finite(x, what):
    if not np.all(np.isfinite(x)):
        raise NonFiniteInput(f"{what} has non-finite coordinates")


def symmetrize(z):
    """Elementary symmetric functions ``(s_1, ..., s_n)`` of the coordinates of ``z``."""
    z = np.asarray(z, dtype=complex).ravel()
    _check_finite(z, "z")
    e = np.zeros(z.size + 1, dtype=complex)
    e[0] = 1.0
    for zj in z:
        e[1:] = e[1:] + zj * e[:-1]
    return e[1:]


def symmetrize_many(z):
    """Row-wise :func:`symmetrize` for an ``(m, n)`` array."""
    z = np.atleast_2d(np.asarray(z, dtype=complex))
    m, n = z.shape
    e = np.zeros((m, n + 1), dtype=complex)
    e[:, 0] = 1.0
    for j in range(n):
        e[:, 1:] = e[:, 1:] + z[:, j : j + 1] * e[:, :-1]
    return e[:, 1:]


def companion(s):
    """Companion matrix of ``q(t) = t^n - s_1 t^(n-1) + ... + (-1)^n s_n``."""
    s = np.asarray(s, dtype=complex).ravel()
    n = s.size
    signs = (-1.0) ** np.arange(1, n + 1)
    c = np.zeros((n, n), dtype=complex)
    c[0, :] = -signs * s
    c[np.arange(1, n), np.arange(n - 1)] = 1.0
    return c


def preimage(s, refine=True):
    """Roots of ``q``, i.e. a point ``z`` with ``symmetrize(z) == s`` (up to order).

    With ``refine`` the tight clusters produced by multiple roots are replaced
    by their mean, which is far better conditioned than the individual roots.
    """
    s = np.asarray(s, dtype=complex).ravel()
    _check_finite(s, "s")
    roots = np.linalg.eigvals(companion(s))
    if refine:
        roots = cluster_mean(roots, scale=max(1.0, float(np.max(np.abs(roots)))), cap=1e-3)
    return roots


def membership(s, region: Region = "Gamma_n", tol=DEFAULT_TOL):
    if tol <= 0:
        raise ValueError("tol must be positive")
    mods = np.abs(preimage(s))
    if region == "Gamma_n":
        return bool(np.all(mods <= 1.0 + tol))
    if region == "G_n":
        return bool(np.all(mods < 1.0 - tol))
    if region == "bGamma_n":
        return bool(np.all(np.abs(mods - 1.0) <= tol))
    raise ValueError(f"unknown region {region!r}")


def sample_boundary(n, density, mode="grid", rng=None, budget=SAMPLE_BUDGET):
    """Symmetrized images of torus points.

    ``grid`` enumerates the ``density**n`` uniform grid, ``random`` draws
    ``density`` i.i.d. uniform torus points.
    """
    if n < 1 or density < 1:
        raise ValueError("need n >= 1 and density >= 1")
    if mode == "grid":
        if density**n > budget:
            raise SampleBudgetExceeded(f"{density}**{n} grid points exceed budget {budget}")
        base = 2 * np.pi * np.arange(density) / density
        angles = np.array(list(product(base, repeat=n)), dtype=float).reshape(-1, n)
        source = "torus-grid"
    elif mode == "random":
        if density > budget:
            raise SampleBudgetExceeded(f"{density} samples exceed budget {budget}")
        rng = np.random.default_rng(rng)
        angles = rng.uniform(0, 2 * np.pi, size=(density, n))
        source = "torus-random"
    else:
        raise ValueError(f"unknown mode {mode!r}")
    pts = symmetrize_many(np.exp(1j * angles))
    return DomainSample(points=pts, source=source, density=density, angles=angles)


def sample_polydisc(n, count, rng=None, radius=1.0):
    """Symmetrized images of i.i.d. points uniform (by area) in the polydisc of given radius."""
    rng = np.random.default_rng(rng)
    r = radius * np.sqrt(rng.uniform(0, 1, size=(count, n)))
    z = r * np.exp(2j * np.pi * rng.uniform(0, 1, size=(count, n)))
    return DomainSample(points=symmetrize_many(z), source="polydisc-random", density=count)


def point_to_json(s):
    return [[float(v.real), float(v.imag)] for v in np.asarray(s, dtype=complex).ravel()]


def point_from_json(pairs):
    return np.array([complex(re, im) for re, im in pairs], dtype=complex)
