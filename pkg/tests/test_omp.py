import numpy as np
import pytest

from src.adaptive_ssc.adaptive import KArray, compute_k_array
from src.adaptive_ssc.data import DataMatrix, SyntheticSpec, add_gaussian_noise, generate_synthetic, normalize_columns
from src.adaptive_ssc.errors import BudgetError, ContractError, ShapeError
from src.adaptive_ssc.omp import CoefMatrix, OmpConfig, omp_solve, ssc_omp, ssc_omp_adaptive


def _unit(values) -> DataMatrix:
    return normalize_columns(DataMatrix(np.asarray(values, dtype=np.float64)))


def _same_matrix(a: CoefMatrix, b: CoefMatrix) -> bool:
    return (
        np.array_equal(a.matrix.indptr, b.matrix.indptr)
        and np.array_equal(a.matrix.indices, b.matrix.indices)
        and np.array_equal(a.matrix.data, b.matrix.data)
    )


def test_target_equal_to_an_atom():
    rng = np.random.default_rng(0)
    d = _unit(rng.standard_normal((10, 6)))
    code = omp_solve(d, d.values[:, 3], OmpConfig(max_atoms=4))
    np.testing.assert_array_equal(code.indices, [3])
    assert code.values[0] == pytest.approx(1.0)
    assert code.residual_norm < 1e-12


def test_two_atom_combination_over_orthonormal_dictionary():
    d = np.eye(4)
    code = omp_solve(d, 2.0 * d[:, 0] + 0.5 * d[:, 1], OmpConfig(max_atoms=2))
    np.testing.assert_array_equal(code.indices, [0, 1])
    np.testing.assert_allclose(code.values, [2.0, 0.5])
    assert code.residual_norm < 1e-12


def test_single_atom_budget_returns_inner_product():
    rng = np.random.default_rng(1)
    d = _unit(rng.standard_normal((8, 12)))
    target = rng.standard_normal(8)
    code = omp_solve(d, target, OmpConfig(max_atoms=1, residual_threshold=0.0))
    j = int(np.argmax(np.abs(d.values.T @ target)))
    np.testing.assert_array_equal(code.indices, [j])
    assert code.values[0] == pytest.approx(float(d.values[:, j] @ target))


def test_ties_go_to_lowest_index():
    d = np.eye(3)
    code = omp_solve(d, np.array([1.0, 1.0, 0.0]), OmpConfig(max_atoms=1))
    np.testing.assert_array_equal(code.indices, [0])


def test_dictionary_contract():
    with pytest.raises(ContractError):
        omp_solve(np.empty((5, 0)), np.ones(5), OmpConfig())
    with pytest.raises(ContractError):
        omp_solve(2.0 * np.eye(3), np.ones(3), OmpConfig())
    with pytest.raises(ShapeError):
        omp_solve(np.eye(3), np.ones(4), OmpConfig())


def test_dependent_atoms_still_reduce_residual():
    base = _unit(np.random.default_rng(2).standard_normal((3, 3))).values
    # the fourth atom is a unit combination of the first two
    extra = base[:, 0] + base[:, 1]
    d = np.column_stack([base, extra / np.linalg.norm(extra)])
    target = base[:, 0] + base[:, 1] + base[:, 2]
    code = omp_solve(d, target, OmpConfig(max_atoms=4, residual_threshold=0.0))
    assert np.all(np.diff(code.residual_norms) <= 1e-12)
    assert code.residual_norm < 1e-10


def test_exact_recovery_over_orthonormal_dictionaries():
    rng = np.random.default_rng(42)
    for case in range(500):
        dim = int(rng.integers(8, 65))
        m = int(rng.integers(1, 9))
        n_atoms = int(rng.integers(m, dim + 1))
        d, _ = np.linalg.qr(rng.standard_normal((dim, n_atoms)))
        support = rng.choice(n_atoms, size=m, replace=False)
        coef = rng.uniform(0.5, 2.0, m) * rng.choice([-1.0, 1.0], m)
        target = d[:, support] @ coef

        code = omp_solve(d, target, OmpConfig(max_atoms=m, residual_threshold=1e-12))
        assert code.residual_norm < 1e-10, f"case {case}"
        assert code.n_iterations == m, f"case {case}"
        assert set(code.indices.tolist()) == set(support.tolist()), f"case {case}"
        np.testing.assert_allclose(code.to_dense(n_atoms)[support], coef, atol=1e-10)


def test_orthogonal_points_give_zero_matrix():
    c = ssc_omp(_unit(np.eye(3)), 1)
    assert c.nnz == 0
    assert c.n == 3


def test_duplicate_points_code_each_other():
    values = np.array([[1.0, 1.0, 0.0], [0.0, 0.0, 1.0]])
    c = ssc_omp(_unit(values), 1)
    dense = c.matrix.toarray()
    assert dense[1, 0] == pytest.approx(1.0)
    assert dense[0, 1] == pytest.approx(1.0)
    np.testing.assert_array_equal(c.column_support(0), [1])
    assert c.column_nnz()[2] == 0


def test_budget_range(small_data):
    x, _ = small_data
    with pytest.raises(BudgetError):
        ssc_omp(x, 0)
    with pytest.raises(BudgetError):
        ssc_omp(x, x.n_points - 1)
    with pytest.raises(ContractError):
        ssc_omp(DataMatrix(3.0 * x.values), 2)


def test_oracle_coefficients_stay_in_subspace(oracle_data):
    x, labels = oracle_data
    c = ssc_omp(x, 8)
    rows, cols, _ = c.triplets()
    assert np.all(labels.assignments[rows] == labels.assignments[cols])
    assert np.all(c.matrix.diagonal() == 0)
    assert np.all(c.residual_norms < 1e-6)


def test_uniform_k_array_matches_shared_budget():
    rng = np.random.default_rng(7)
    for case in range(50):
        n = int(rng.integers(6, 60))
        k = int(rng.integers(1, min(9, n - 2) + 1))
        x = _unit(rng.standard_normal((int(rng.integers(3, 15)), n)))
        assert _same_matrix(ssc_omp(x, k), ssc_omp_adaptive(x, KArray.uniform(k, n))), f"case {case}"


def test_adaptive_respects_per_point_budget():
    spec = SyntheticSpec(n_subspaces=3, subspace_dim=4, ambient_dim=20, points_per_subspace=30, orthogonal=False)
    x, _ = generate_synthetic(spec)
    noisy = add_gaussian_noise(x, 0.4, rng_seed=1)
    k_array = compute_k_array(noisy, 6)
    c = ssc_omp_adaptive(noisy, k_array, eps=1e-6)
    nnz = c.column_nnz()
    assert np.all(nnz <= k_array.sizes)
    short = nnz < k_array.sizes
    assert np.all(c.residual_norms[short] < 1e-6)

    # support = min(budget, iterations an unbounded pursuit needs to reach eps)
    n = noisy.n_points
    for i in range(n):
        others = np.delete(np.arange(n), i)
        unbounded = omp_solve(
            noisy.columns(others), noisy.values[:, i], OmpConfig(max_atoms=n - 1, residual_threshold=1e-6)
        )
        expected = min(int(k_array.sizes[i]), unbounded.n_iterations)
        assert nnz[i] == expected, f"point {i}"
        chosen = np.sort(others[unbounded.indices[:expected]])
        np.testing.assert_array_equal(c.column_support(i), chosen, err_msg=f"point {i}")


def test_adaptive_length_mismatch(small_data):
    x, _ = small_data
    with pytest.raises(ShapeError):
        ssc_omp_adaptive(x, KArray.uniform(2, x.n_points - 1))


def test_parallel_coding_matches_serial(small_data):
    x, _ = small_data
    assert _same_matrix(ssc_omp(x, 4), ssc_omp(x, 4, n_jobs=3))


def test_coef_matrix_rejects_nonzero_diagonal():
    with pytest.raises(ContractError):
        CoefMatrix.from_dense(np.eye(3))


def test_coef_matrix_csv_keeps_trailing_empty_columns(tmp_path):
    c = CoefMatrix.from_triplets([1, 0], [0, 1], [0.25, -1.5], 4)
    loaded = CoefMatrix.from_csv(c.to_csv(tmp_path / "c.csv"))
    assert loaded.n == 4
    assert _same_matrix(loaded, c)
