import numpy as np
import pytest

from src.adaptive_ssc.data import (
    DataMatrix,
    Labels,
    SyntheticSpec,
    add_gaussian_noise,
    generate_synthetic,
    load_csv,
    load_matrix,
    load_npz,
    normalize_columns,
    write_csv,
)
from src.adaptive_ssc.errors import (
    ContractError,
    DegenerateInputError,
    ParseError,
    RangeError,
    ShapeError,
    SizeError,
    SpecError,
)
from src.adaptive_ssc.numeric import build_model


def _write(path, text):
    path.write_text(text)
    return path


def test_load_csv_splits_label_column(tmp_path):
    path = _write(tmp_path / "pts.csv", "1,0,0,2\n0,1,0,0\n0,0,1,1\n")
    x, labels = load_csv(path)
    assert (x.dim, x.n_points) == (3, 3)
    np.testing.assert_array_equal(x.values[:, 0], [1.0, 0.0, 0.0])
    assert labels.n_clusters == 3
    assert labels.assignments[0] == 2, f"Unexpected label remap: {labels.assignments}"


def test_load_csv_usps_like_shape(tmp_path):
    rng = np.random.default_rng(0)
    table = np.hstack([rng.standard_normal((100, 256)), rng.integers(0, 10, (100, 1))])
    table[:10, -1] = np.arange(10)
    path = tmp_path / "usps.csv"
    np.savetxt(path, table, delimiter=",", fmt="%.10g")
    x, labels = load_csv(path)
    assert (x.dim, x.n_points) == (256, 100)
    assert labels.n_clusters == 10


def test_load_csv_skips_text_header(tmp_path):
    path = _write(tmp_path / "pts.csv", "f1,f2,label\n1,2,0\n3,4,1\n5,6,0\n")
    x, labels = load_csv(path)
    assert x.n_points == 3
    np.testing.assert_array_equal(labels.assignments, [0, 1, 0])


def test_load_csv_without_labels(tmp_path):
    path = _write(tmp_path / "pts.csv", "1,2,3\n4,5,6\n7,8,9\n")
    x, labels = load_csv(path, has_labels=False)
    assert labels is None
    assert (x.dim, x.n_points) == (3, 3)


def test_malformed_cell_reports_position(tmp_path):
    path = _write(tmp_path / "bad.csv", "1,2,3\n4,5,x\n7,8,9\n")
    with pytest.raises(ParseError) as exc:
        load_csv(path, has_labels=False)
    assert "row 2" in str(exc.value) and "column 3" in str(exc.value)


def test_ragged_rows_rejected(tmp_path):
    path = _write(tmp_path / "ragged.csv", "1,2,3\n4,5,6,7\n7,8,9\n")
    with pytest.raises(ShapeError):
        load_csv(path, has_labels=False)


def test_too_few_points(tmp_path):
    path = _write(tmp_path / "two.csv", "1,2,0\n3,4,1\n")
    with pytest.raises(SizeError):
        load_csv(path)


def test_non_integer_label(tmp_path):
    path = _write(tmp_path / "pts.csv", "1,2,0\n3,4,1.5\n5,6,0\n")
    with pytest.raises(ParseError):
        load_csv(path)


def test_load_matrix_missing_file(tmp_path):
    with pytest.raises(ContractError):
        load_matrix(tmp_path / "nope.csv")


def test_load_npz(tmp_path):
    rng = np.random.default_rng(1)
    data = rng.standard_normal((6, 4))
    np.savez(tmp_path / "d.npz", data=data, labels=np.array([5, 5, 7, 7, 9, 9]))
    x, labels = load_matrix(tmp_path / "d.npz")
    assert (x.dim, x.n_points) == (4, 6)
    np.testing.assert_array_equal(x.values, data.T)
    np.testing.assert_array_equal(labels.assignments, [0, 0, 1, 1, 2, 2])

    np.savez(tmp_path / "nolabels.npz", data=data)
    with pytest.raises(ShapeError):
        load_npz(tmp_path / "nolabels.npz")


def test_write_then_load_preserves_values(tmp_path, small_data):
    x, labels = small_data
    path = write_csv(tmp_path / "out" / "small.csv", x, labels)
    x2, labels2 = load_csv(path)
    np.testing.assert_array_equal(x2.values, x.values)
    np.testing.assert_array_equal(labels2.assignments, labels.assignments)


def test_load_csv_reads_seventeen_digit_values_exactly(tmp_path):
    cells = ["-0.12345678901234567", "0.30000000000000004", "2.2250738585072014e-308"]
    path = _write(tmp_path / "digits.csv", "".join(f"{c},0\n" for c in cells))
    x, _ = load_csv(path)
    assert x.values[0].tolist() == [float(c) for c in cells]


def test_data_matrix_validation():
    with pytest.raises(ShapeError):
        DataMatrix(np.ones(5))
    with pytest.raises(SizeError):
        DataMatrix(np.ones((3, 2)))
    with pytest.raises(ShapeError):
        DataMatrix(np.ones((2, 3)), unit_normalized=True)
    x = DataMatrix(np.ones((2, 3)))
    with pytest.raises(ValueError):
        x.values[0, 0] = 5.0


def test_labels_from_raw_and_gaps():
    labels = Labels.from_raw([10, 3, 10, 7])
    np.testing.assert_array_equal(labels.assignments, [2, 0, 2, 1])
    assert labels.n_clusters == 3
    with pytest.raises(SpecError):
        Labels([0, 2, 2], 3)


def test_normalize_columns_examples():
    x = DataMatrix(np.array([[3.0, 1.0, 0.0], [4.0, 0.0, 1.0]]))
    xn = normalize_columns(x)
    np.testing.assert_allclose(xn.values[:, 0], [0.6, 0.8])
    np.testing.assert_array_equal(xn.values[:, 1], [1.0, 0.0])
    assert xn.unit_normalized


def test_normalize_columns_zero_column():
    x = DataMatrix(np.array([[1.0, 0.0, 2.0], [1.0, 0.0, 0.0]]))
    with pytest.raises(DegenerateInputError) as exc:
        normalize_columns(x)
    assert "Column 1" in str(exc.value)


def test_normalize_columns_idempotent():
    rng = np.random.default_rng(3)
    once = normalize_columns(DataMatrix(rng.standard_normal((7, 12))))
    twice = normalize_columns(once)
    np.testing.assert_allclose(twice.values, once.values, atol=1e-15)


def test_synthetic_small_orthogonal():
    spec = SyntheticSpec(n_subspaces=2, subspace_dim=1, ambient_dim=2, points_per_subspace=5)
    x, labels = generate_synthetic(spec)
    assert x.n_points == 10
    np.testing.assert_allclose(np.linalg.norm(x.values, axis=0), 1.0, atol=1e-12)
    cross = x.values[:, labels.assignments == 0].T @ x.values[:, labels.assignments == 1]
    assert np.abs(cross).max() <= 1e-9


def test_synthetic_default_shape_and_determinism(oracle_data):
    x, labels = oracle_data
    assert (x.dim, x.n_points, labels.n_clusters) == (50, 500, 5)
    again, _ = generate_synthetic(SyntheticSpec())
    np.testing.assert_array_equal(again.values, x.values)
    other, _ = generate_synthetic(SyntheticSpec(rng_seed=1))
    assert not np.array_equal(other.values, x.values)


def test_synthetic_points_lie_in_their_subspace(oracle_data):
    x, labels = oracle_data
    for cluster in range(labels.n_clusters):
        block = x.values[:, labels.assignments == cluster]
        assert np.linalg.matrix_rank(block, tol=1e-8) == 5


def test_synthetic_spec_invariants():
    with pytest.raises(SpecError):
        build_model(SyntheticSpec, subspace_dim=50, ambient_dim=50)
    with pytest.raises(SpecError):
        build_model(SyntheticSpec, n_subspaces=11, subspace_dim=5, ambient_dim=50)
    spec = build_model(SyntheticSpec, n_subspaces=11, subspace_dim=5, ambient_dim=50, orthogonal=False)
    assert spec.n_subspaces == 11


def test_noise_sigma_zero_only_normalizes(small_data):
    x, _ = small_data
    np.testing.assert_array_equal(add_gaussian_noise(x, 0.0).values, normalize_columns(x).values)


def test_noise_corrupts_exact_column_count():
    rng = np.random.default_rng(5)
    x = normalize_columns(DataMatrix(rng.standard_normal((10, 100))))
    noisy = add_gaussian_noise(x, 0.5, rng_seed=11)
    changed = ~np.all(np.isclose(noisy.values, x.values, rtol=0, atol=1e-12), axis=0)
    assert int(changed.sum()) == 50
    again = add_gaussian_noise(x, 0.5, rng_seed=11)
    np.testing.assert_array_equal(again.values, noisy.values)


def test_noise_variance_matches_request():
    # a large offset on the first axis makes the added noise recoverable from the direction
    dim, n, variance, scale = 2016, 1000, 0.01, 1000.0
    values = np.zeros((dim, n))
    values[0] = scale
    noisy = add_gaussian_noise(DataMatrix(values), 1.0, variance, rng_seed=2).values
    recovered = scale * noisy[1:] / noisy[0]
    energy = float(np.mean(np.sum(recovered ** 2, axis=0)))
    expected = (dim - 1) * variance
    assert abs(energy - expected) / expected < 0.05, f"{energy} vs {expected}"


def test_noise_blend_mode_is_unit_norm(small_data):
    x, _ = small_data
    blended = add_gaussian_noise(x, 0.3, rng_seed=4, mode="blend")
    np.testing.assert_allclose(np.linalg.norm(blended.values, axis=0), 1.0, atol=1e-12)
    assert not np.allclose(blended.values, x.values)


def test_noise_rejects_bad_arguments(small_data):
    x, _ = small_data
    with pytest.raises(RangeError):
        add_gaussian_noise(x, 1.5)
    with pytest.raises(RangeError):
        add_gaussian_noise(x, 0.5, variance=0.0)
    with pytest.raises(SpecError):
        add_gaussian_noise(x, 0.5, mode="sideways")
