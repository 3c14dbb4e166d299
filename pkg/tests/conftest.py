import json

import numpy as np
import pytest

from mjpbounds import make_model

TWO_STATE_Q = [[-1.0, 1.0], [2.0, -2.0]]
TWO_STATE_F = [1.0, -2.0]

THREE_CYCLE_Q = [[-1.0, 1.0, 0.0], [0.0, -1.0, 1.0], [1.0, 0.0, -1.0]]
THREE_CYCLE_F = [1.0, 0.5, -1.5]

THREE_DENSE_Q = [[-2.0, 1.0, 1.0], [1.0, -2.0, 1.0], [3.0, 1.0, -4.0]]
THREE_DENSE_F = [2.0, -1.0, 0.5]


@pytest.fixture(scope="session")
def two_state():
    """Reversible 2-state chain: pi = (2/3, 1/3), gap 3, sigma_hat^2 = 4/3."""
    return make_model(TWO_STATE_Q, TWO_STATE_F)


@pytest.fixture(scope="session")
def three_cycle():
    """Unidirectional 3-cycle: uniform pi, not reversible, gap 3/2."""
    return make_model(THREE_CYCLE_Q, THREE_CYCLE_F)


@pytest.fixture(scope="session")
def three_dense():
    """Dense irreducible 3-state chain, not reversible."""
    return make_model(THREE_DENSE_Q, THREE_DENSE_F)


def random_irreducible_model(rng, n=None):
    """Random irreducible model: a directed ring plus random extra edges."""
    if n is None:
        n = int(rng.integers(2, 7))
    rates = np.zeros((n, n))
    for x in range(n):
        rates[x, (x + 1) % n] = 0.5 + rng.uniform()
    extra = rng.uniform(size=(n, n)) < 0.5
    np.fill_diagonal(extra, False)
    rates[extra] += rng.uniform(0.0, 2.0, size=(n, n))[extra]
    np.fill_diagonal(rates, -rates.sum(axis=1))
    while True:
        f = rng.uniform(-1.0, 1.0, size=n)
        if np.max(f) - np.min(f) > 0.2:
            break
    return make_model(rates, f)


@pytest.fixture
def model_file(tmp_path):
    def write(name="model.json", q=TWO_STATE_Q, f=TWO_STATE_F, nu=None, seed=None,
              labels=None, extra=None):
        n = len(q)
        doc = {
            "states": labels or [f"s{i}" for i in range(n)],
            "q": q,
            "f": f,
        }
        if nu is not None:
            doc["nu"] = nu
        if seed is not None:
            doc["seed"] = seed
        if extra:
            doc.update(extra)
        path = tmp_path / name
        path.write_text(json.dumps(doc))
        return str(path)

    return write
