import pytest

from qcpredict.compiler import enumerate_options
from qcpredict.devices import builtin_devices


@pytest.fixture(scope="session")
def devices():
    # session scope keeps the per-device distance caches warm across tests
    return builtin_devices()


@pytest.fixture(scope="session")
def fleet(devices):
    return {d.id: d for d in devices}


@pytest.fixture(scope="session")
def options(devices):
    return enumerate_options(devices)
