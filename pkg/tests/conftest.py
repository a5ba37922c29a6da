import numpy as np
import pytest

from anibound.exponents import INF, Exponents, check_admissibility, derive
from anibound.fields import GridFunction, make_grid
from anibound.integrand import ModelIntegrand, WeightField


def constant(c):
    return WeightField("constant", amplitude=c)


def simple_model(n, p=2.0, q=None, gamma=None, r=INF, s=INF, u_coeff=0.0):
    """Isotropic model with constant unit weights."""
    q = p if q is None else q
    gamma = q if gamma is None else gamma
    e = Exponents(n, (p,) * n, q, gamma, (r,) * n, s)
    return ModelIntegrand(e, (constant(1.0),) * n, constant(1.0), u_coeff)


def unit_grid(n, h):
    return make_grid([(0.0, 1.0)] * n, h)


def coordinate_field(grid, axis=0):
    pts = grid.node_points()
    return GridFunction(grid, pts[:, axis].reshape(grid.shape))


def hat_bump(grid, amplitude=1.0):
    """Tensor-product hat centered in the box, zero on the boundary."""
    vals = np.ones(grid.shape)
    for i, x in enumerate(grid.node_axes()):
        lo, hi = grid.lo[i], grid.hi[i]
        mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
        hat = np.clip(1.0 - np.abs(x - mid) / half, 0.0, None)
        shape = [1] * grid.n
        shape[i] = len(x)
        vals = vals * hat.reshape(shape)
    return GridFunction(grid, amplitude * vals)


def random_exponents(rng):
    """One random exponent tuple; may or may not be admissible."""
    n = int(rng.integers(2, 5))
    p = tuple(rng.uniform(1.1, 3.5, size=n))
    q = max(p) * rng.uniform(1.0, 1.4)
    gamma = q * rng.uniform(1.0, 1.4)
    r = tuple(
        INF if rng.random() < 0.4 else float(rng.uniform(1.0, 20.0)) for _ in range(n)
    )
    s = INF if rng.random() < 0.4 else float(rng.uniform(1.05, 20.0))
    return Exponents(n, p, q, gamma, r, s)


def random_admissible_exponents(rng, count, max_attempts=10_000_000):
    """Generate `count` admissible tuples by rejection sampling."""
    out = []
    attempts = 0
    while len(out) < count:
        attempts += 1
        if attempts > max_attempts:
            raise RuntimeError("admissible-tuple sampling stalled")
        e = random_exponents(rng)
        if check_admissibility(derive(e), e).admissible:
            out.append(e)
    return out


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
