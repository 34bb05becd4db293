"""
Shared fixtures: the default synthetic ground truth and its noiseless star sweep.
"""

import pytest

from shape_scaling.config import FitOptions
from shape_scaling.fit import fit_dimension
from shape_scaling.oracle import default_ground_truth, gen_center_runs, gen_runs
from shape_scaling.sweeps import published_star_design


@pytest.fixture(scope="session")
def ground_truth():
    return default_ground_truth()


@pytest.fixture(scope="session")
def star_design():
    return published_star_design()


@pytest.fixture(scope="session")
def star_records(ground_truth, star_design):
    return gen_runs(ground_truth, star_design)


@pytest.fixture(scope="session")
def center_records(ground_truth, star_design):
    return gen_center_runs(ground_truth, star_design)


@pytest.fixture(scope="session")
def star_fits(star_records):
    """Noiseless fit of every dimension, computed once per session."""
    options = FitOptions(seed=0)
    return {
        name: fit_dimension(star_records, options, dimension=name)
        for name in ("width", "depth", "mlp_dim")
    }
