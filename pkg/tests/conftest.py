import numpy as np
import pytest

from bosonctx.fock import FockState, occupations


@pytest.fixture
def rng():
    return np.random.default_rng(20140101)


def random_fock(rng, modes, n_photons, n_terms=None):
    keys = occupations(modes, n_photons)
    if n_terms is not None and n_terms < len(keys):
        idx = rng.choice(len(keys), size=n_terms, replace=False)
        keys = [keys[i] for i in sorted(idx)]
    amps = rng.standard_normal(len(keys)) + 1j * rng.standard_normal(len(keys))
    return FockState(modes, zip(keys, amps))


ACCEPTANCE: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE:
            terminalreporter.write_line(line)
