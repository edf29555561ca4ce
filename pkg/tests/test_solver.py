import numpy as np
import pytest
import scipy.sparse as sp

from hjcsim.exceptions import ConvergenceError, ParameterError
from hjcsim.hamiltonian import build_hjc
from hjcsim.model import ModelParams, Truncation
from hjcsim.polaron import dressed_energy, dressed_state_vector
from hjcsim.solver import lowest_eigenpairs


def model(n=3, trunc=(3, 1, None), **kw):
    kw.setdefault("lambda_e", 1.0)
    kw.setdefault("omega_rabi", 4.0)
    return ModelParams(n_molecules=n, trunc=Truncation(*trunc), **kw)


@pytest.mark.parametrize("dense_threshold", [0, 10])
def test_two_level_example(dense_threshold):
    g = 0.7
    h = np.array([[0, 1j * g], [-1j * g, 0]])
    if dense_threshold == 0:
        # Krylov space cannot exceed the dimension
        res = lowest_eigenpairs(h, n_pairs=1, dense_threshold=0)
    else:
        res = lowest_eigenpairs(h, n_pairs=2, dense_threshold=dense_threshold)
    assert res.eigenvalues[0] == pytest.approx(-g, abs=1e-12)
    v = res.eigenvectors[:, 0]
    assert abs(v[1] / v[0]) == pytest.approx(1.0, abs=1e-10)


def test_lanczos_matches_dense_oracle():
    h = build_hjc(model(3, (3, 1, None)))
    ref = np.linalg.eigvalsh(h.toarray())[:4]
    res = lowest_eigenpairs(h, n_pairs=4, tol=1e-9, dense_threshold=0, seed=5)
    assert res.method == "lanczos"
    assert np.abs(res.eigenvalues - ref).max() <= 1e-8
    assert res.residuals.max() <= 1e-9


def test_residuals_are_true_residuals():
    h = build_hjc(model(4, (3, 2, None)))
    res = lowest_eigenpairs(h, n_pairs=3, tol=1e-10, dense_threshold=0)
    a = h.toarray()
    for j in range(3):
        v = res.eigenvectors[:, j]
        true = np.linalg.norm(a @ v - res.eigenvalues[j] * v)
        assert true <= 1e-10
        assert true == pytest.approx(res.residuals[j], abs=1e-12)


def test_eigenvectors_orthonormal():
    h = build_hjc(model(4, (3, 2, None)))
    res = lowest_eigenpairs(h, n_pairs=5, dense_threshold=0)
    gram = res.eigenvectors.conj().T @ res.eigenvectors
    assert np.abs(gram - np.eye(5)).max() <= 1e-10


def test_degenerate_pair_resolved():
    diag = np.r_[-1.0, -1.0, np.linspace(0, 5, 300)]
    q, _ = np.linalg.qr(np.random.default_rng(0).normal(size=(302, 302)))
    a = q @ np.diag(diag) @ q.T
    res = lowest_eigenpairs(a, n_pairs=3, dense_threshold=0, tol=1e-9)
    assert np.allclose(res.eigenvalues, [-1, -1, 0], atol=1e-9)
    basis = q[:, :2]
    proj = basis.T @ res.eigenvectors[:, :2]
    assert np.abs(proj.conj().T @ proj - np.eye(2)).max() <= 1e-8


def test_uncoupled_identical_diagonal_entries():
    a = np.diag(np.r_[0.5, 0.5, np.arange(1.0, 99.0)])
    res = lowest_eigenpairs(a, n_pairs=2, dense_threshold=0)
    assert np.array_equal(res.eigenvalues.round(12), [0.5, 0.5])
    assert np.abs(res.eigenvectors.conj().T @ res.eigenvectors - np.eye(2)).max() <= 1e-10
    assert np.abs(res.eigenvectors[2:]).max() <= 1e-9


def test_sparse_input_and_seed_recorded():
    a = sp.diags([np.arange(50.0), np.full(49, 0.3)], [0, 1])
    a = a + sp.triu(a, 1).T
    res = lowest_eigenpairs(a, dense_threshold=0, seed=11)
    assert res.seed == 11
    assert res.eigenvalues[0] == pytest.approx(np.linalg.eigvalsh(a.toarray())[0], abs=1e-10)


def test_seed_independence_of_result():
    h = build_hjc(model(3, (3, 1, None)))
    e = [lowest_eigenpairs(h, dense_threshold=0, seed=s).eigenvalues[0] for s in (0, 1, 2)]
    assert np.ptp(e) <= 1e-10


def test_convergence_failure_raises():
    h = build_hjc(model(4, (4, 2, None)))
    with pytest.raises(ConvergenceError) as err:
        lowest_eigenpairs(h, n_pairs=3, tol=1e-14, max_iter=1, dense_threshold=0, krylov_dim=12)
    assert err.value.best_residual > 0
    assert err.value.iterations == 1


@pytest.mark.parametrize("kw", [{"n_pairs": 0}, {"tol": 0.0}, {"n_pairs": 10 ** 6}])
def test_bad_arguments(kw):
    with pytest.raises(ParameterError):
        lowest_eigenpairs(np.eye(4), **kw)


def test_ground_energy_below_dressed_estimate():
    p = model(4, (4, 2, None))
    h = build_hjc(p)
    res = lowest_eigenpairs(h, n_pairs=1, dense_threshold=0)
    v = dressed_state_vector(p, "-", 0, basis=h.basis)
    v = v / np.linalg.norm(v)
    variational = h.expectation(v).real
    assert res.eigenvalues[0] <= variational + 1e-12
    assert variational - res.eigenvalues[0] < 0.5
    assert dressed_energy(p, "-") == pytest.approx(-4.0)


def test_gauge_does_not_change_energies():
    p = model(3, (3, 1, None))
    a = lowest_eigenpairs(build_hjc(p), n_pairs=3, dense_threshold=0).eigenvalues
    b = lowest_eigenpairs(build_hjc(p, gauge="real"), n_pairs=3, dense_threshold=0).eigenvalues
    assert np.abs(a - b).max() <= 1e-10


def test_threads_do_not_change_result():
    h = build_hjc(model(4, (3, 2, None)))
    a = lowest_eigenpairs(h, n_pairs=2, dense_threshold=0, seed=3)
    b = lowest_eigenpairs(h, n_pairs=2, dense_threshold=0, seed=3, threads=3)
    assert np.array_equal(a.eigenvalues, b.eigenvalues)
