import json
import math

import numpy as np
import pytest

from sconv.divergences import coherent_information
from sconv.states import (
    CqEnsemble,
    DensityMatrix,
    StateError,
    basis_state,
    cq_state,
    derive_seed,
    max_entangled,
    maximally_mixed,
    random_cq,
    random_density,
    random_pure,
)


def test_max_entangled():
    phi = max_entangled(2)
    assert np.allclose(phi.reduce([0]).mat, np.eye(2) / 2)
    assert np.allclose(phi.reduce([1]).mat, np.eye(2) / 2)
    assert phi.purity() == pytest.approx(1.0)
    assert coherent_information(phi) == pytest.approx(math.log(2))
    with pytest.raises(ValueError):
        max_entangled(1)


def test_cq_state_blocks():
    rho0 = random_density((2,), None, 1)
    single = cq_state(CqEnsemble([1.0], (rho0,)))
    assert np.allclose(single.mat, np.kron(np.diag([1.0]), rho0.mat))
    same = cq_state(CqEnsemble([0.5, 0.5], (rho0, rho0)))
    assert np.allclose(same.mat, np.kron(np.eye(2) / 2, rho0.mat))
    assert same.layout == (2, 2)
    assert np.trace(cq_state(random_cq(3, (2,), 4)).mat).real == pytest.approx(1.0)


def test_density_validation():
    with pytest.raises(StateError):
        DensityMatrix(np.diag([0.5, 0.6]), (2,))
    with pytest.raises(StateError):
        DensityMatrix(np.diag([1.1, -0.1]), (2,))
    with pytest.raises(StateError):
        DensityMatrix(np.array([[0.5, 0.1], [0.2, 0.5]]), (2,))
    with pytest.raises(ValueError):
        DensityMatrix(np.eye(4) / 4, (2, 3))


def test_density_clamps_tiny_negatives():
    rho = DensityMatrix(np.diag([1.0 + 5e-10, -5e-10]), (2,))
    assert rho.eigenvalues()[0] >= 0
    assert np.trace(rho.mat).real == pytest.approx(1.0, abs=1e-15)


def test_random_density_rank_and_determinism():
    pure = random_density((2, 3), 1, 11)
    assert pure.purity() == pytest.approx(1.0, abs=1e-9)
    full = random_density((2, 3), None, 11)
    assert full.eigenvalues()[0] > 0
    assert np.array_equal(random_density((3,), 2, 5).mat, random_density((3,), 2, 5).mat)
    with pytest.raises(ValueError):
        random_density((2,), 3, 0)


def test_random_states_differ_across_seeds():
    differ = sum(
        np.max(np.abs(random_density((2,), None, 2 * i).mat - random_density((2,), None, 2 * i + 1).mat)) > 1e-6
        for i in range(100)
    )
    assert differ == 100


def test_random_pure_and_cq():
    psi = random_pure((2, 2), 3)
    assert np.trace(psi.mat).real == pytest.approx(1.0)
    assert psi.purity() == pytest.approx(1.0)
    e = random_cq(4, (2,), 9)
    assert e.probs.sum() == pytest.approx(1.0)
    assert np.array_equal(e.probs, random_cq(4, (2,), 9).probs)


def test_derive_seed_is_deterministic_and_spread():
    seeds = {derive_seed(1, i) for i in range(1000)}
    assert len(seeds) == 1000
    assert derive_seed(7, 3) == derive_seed(7, 3)
    assert all(0 <= s < 2**64 for s in seeds)


def test_json_round_trip():
    rho = random_density((2, 2), 2, 3)
    back = DensityMatrix.from_json(json.dumps(rho.to_json()))
    assert back.layout == rho.layout and np.allclose(back.mat, rho.mat)
    e = random_cq(2, (3,), 1)
    e2 = CqEnsemble.from_json(json.dumps(e.to_json()))
    assert np.allclose(e2.probs, e.probs)
    with pytest.raises(StateError):
        DensityMatrix.from_json({"layout": [2]})


def test_ensemble_validation():
    with pytest.raises(StateError):
        CqEnsemble([0.5, 0.6], (basis_state(0, 2), basis_state(1, 2)))
    with pytest.raises(StateError):
        CqEnsemble([0.5, 0.5], (basis_state(0, 2), maximally_mixed(3)))
