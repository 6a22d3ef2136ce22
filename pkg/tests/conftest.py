import numpy as np
import pytest

from fallguard.classify import stratified_split_indices, train_random_forest, RandomForestParams
from fallguard.features import to_matrix
from fallguard.simgen import generate_dataset, load_templates


@pytest.fixture(scope="session")
def templates():
    return load_templates()


@pytest.fixture(scope="session")
def small_dataset():
    return generate_dataset(60, seed=7)


@pytest.fixture(scope="session")
def small_split(small_dataset):
    X, y = to_matrix(small_dataset)
    tr, te = stratified_split_indices(y, 0.2, seed=7)
    return X[tr], y[tr], X[te], y[te]


@pytest.fixture(scope="session")
def small_forest(small_split):
    Xtr, ytr, _, _ = small_split
    return train_random_forest(Xtr, ytr, RandomForestParams(n_trees=15), seed=3)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# acceptance criteria register their verdicts here; printed at the end of the run
ACCEPTANCE_RESULTS: dict[int, tuple[bool, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE_RESULTS):
        ok, detail = ACCEPTANCE_RESULTS[n]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} criterion {n}: {detail}")
