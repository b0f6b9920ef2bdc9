import numpy as np
import pytest

from c6proto.modules.qstate import c6
from c6proto.modules.tables import load_table


@pytest.fixture
def rng():
    return np.random.default_rng(7)


@pytest.fixture
def channel():
    return c6()


@pytest.fixture(scope="session")
def tables():
    return {str(n): load_table(f"table{n}") for n in range(1, 7)}
