import pytest

from levyarea import logprodexp as lp
from levyarea.area import TABLE_P_VALUES


@pytest.fixture(scope="session")
def tables():
    """Desk-scale inverse-CDF tables for the exponential-product sampler."""
    return {
        p: lp.build_table(p, lp.default_grid(p, grid_points=10**5 + 1))
        for p in TABLE_P_VALUES
    }
