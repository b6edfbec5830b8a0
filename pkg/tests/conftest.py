import numpy as np
import pytest

from gafocus import harness
from gafocus.medium import DetectorModel, generate_medium


@pytest.fixture
def small_medium():
    return generate_medium(n_outputs=1, n_modes=64, target_channel=0, seed=11)


@pytest.fixture
def clean_detector():
    # generous full scale so small-scale tests never saturate
    return DetectorModel(gain=1e-3, noise_sigma=0.0)


@pytest.fixture
def small_config():
    return harness.build_config(
        overrides={
            "n_modes": 64,
            "population_size": 8,
            "offspring_per_iteration": 4,
            "max_iterations": 30,
            "baseline_samples": 200,
            "seed": 11,
        }
    )
