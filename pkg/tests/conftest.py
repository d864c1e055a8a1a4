import numpy as np
import pytest
from hypothesis import settings

from bohmflow import Coherent, FreeGaussian, Superposition

settings.register_profile("default", max_examples=40, deadline=None, derandomize=True)
settings.load_profile("default")


@pytest.fixture(params=["coherent", "free", "superposition"])
def analytic_model(request):
    return {"coherent": Coherent(1.0), "free": FreeGaussian(),
            "superposition": Superposition()}[request.param]


def unwrap_diff(s, s_ref):
    """Phase difference folded into (-pi, pi]."""
    return np.angle(np.exp(1j * (np.asarray(s) - np.asarray(s_ref))))
