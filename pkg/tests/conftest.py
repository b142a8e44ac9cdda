import numpy as np
import pytest
from hypothesis import settings

from poreswell import config as cfgmod

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")

# criterion id -> (passed, detail), filled by test_acceptance.py
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE, key=lambda k: int(k.split("-")[1])):
        ok, detail = ACCEPTANCE[key]
        terminalreporter.write_line(f"{key} {'PASS' if ok else 'FAIL'}  {detail}")


@pytest.fixture
def default_cfg():
    return cfgmod.preset("default")


@pytest.fixture
def default_rc():
    return cfgmod.build_run_config(cfgmod.preset("default"))


@pytest.fixture
def default_model(default_rc):
    return default_rc.model


@pytest.fixture
def equilibrium_rc():
    return cfgmod.build_run_config(cfgmod.preset("equilibrium"))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
