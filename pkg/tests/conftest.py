import sys
import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from cdm import kernels
from cdm.dataset import LabeledDataset

settings.register_profile("cdm", deadline=None, max_examples=60, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("cdm")


@pytest.fixture(params=sorted(kernels.BACKENDS))
def backend(request):
    """Each kernel backend (compiled and pure Python, when both are available)."""
    return kernels.BACKENDS[request.param]


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def blobs(rng, n_classes, per_class, dim, spread=4.0, noise=1.0, tag=""):
    """Gaussian class blobs with well separated random centres."""
    centres = spread * rng.standard_normal((n_classes, dim))
    labels = np.repeat(np.arange(n_classes), per_class)
    X = centres[labels] + noise * rng.standard_normal((labels.size, dim))
    return LabeledDataset(X, labels, tuple(range(n_classes)), tag)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[number])
