import pytest

from src.adaptive_ssc.data import SyntheticSpec, generate_synthetic


@pytest.fixture(scope="session")
def oracle_data():
    """The default orthogonal union of subspaces: 5 subspaces of dim 5 in R^50, 100 points each."""
    return generate_synthetic(SyntheticSpec())


@pytest.fixture(scope="session")
def small_data():
    spec = SyntheticSpec(n_subspaces=3, subspace_dim=3, ambient_dim=20, points_per_subspace=20, rng_seed=7)
    return generate_synthetic(spec)
