import numpy as np
import pytest

from paretolab import bench, campaign


@pytest.fixture
def small_grid_config():
    """A 90-point campaign grid that keeps integration tests fast."""
    return campaign.GridConfig(
        simplex_denominator=3,
        speeds=(1000.0, 4000.0, 8000.0),
        dilutions=(0.0, 0.5, 1.0),
    )


@pytest.fixture
def small_campaign(small_grid_config):
    return campaign.new_campaign(small_grid_config, seed=0, epsilon=0.1)


@pytest.fixture
def seeded_small_campaign(small_campaign):
    """Small campaign with enough surrogate measurements to step."""
    state = small_campaign
    state.burn_in = 6
    rng = np.random.default_rng(0)
    for pid in rng.choice(state.n_points, 8, replace=False):
        h, ie = bench.surrogate_spincoat(state.points[pid], seed=5)
        campaign.ingest(
            state,
            campaign.Measurement(point_id=int(pid), hardness=h, inverse_elasticity=ie),
        )
    return state
