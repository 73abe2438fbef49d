import numpy as np
import pytest

from hebmix import backend
from hebmix import _fallback


def _backend_modules():
    mods = [_fallback]
    try:
        from hebmix import _kernels
        mods.append(_kernels)
    except ImportError:
        pass
    return mods


@pytest.fixture(params=_backend_modules(), ids=lambda m: m.NAME)
def kernel_backend(request, monkeypatch):
    """Run a test against every available kernel backend."""
    monkeypatch.setattr(backend, "_impl", request.param)
    return request.param


@pytest.fixture
def rng():
    return np.random.default_rng(20240811)
