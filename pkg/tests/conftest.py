import random

import pytest

from imsi_ibe.actors import HomeNetwork, ServingNetwork, UserEquipment, provision_sn
from imsi_ibe.crypto import GroupParams
from imsi_ibe.identity import ExpiryTime

NOW = ExpiryTime.parse("20250615T100000Z")
ET_UE = ExpiryTime.parse("20251231T235959Z")
IMSIS = ("244050000000001", "244050000000002")

_acceptance_lines = []


@pytest.fixture
def acceptance_log():
    return _acceptance_lines


def pytest_terminal_summary(terminalreporter):
    if _acceptance_lines:
        terminalreporter.section("acceptance criteria")
        for line in _acceptance_lines:
            terminalreporter.write_line(line)


@pytest.fixture
def params():
    return GroupParams()


@pytest.fixture
def small():
    return GroupParams(p=101)


class Net:
    """Minimal HN + one SN + two UEs wired together without a transcript."""

    def __init__(self, seed=0):
        self.rng = random.Random(seed)
        self.now = NOW
        self.hn = HomeNetwork("24405", self.rng, mnc_len_map={"244": 2})
        self.sn = ServingNetwork("24405", self.rng)
        self.ues = [UserEquipment(self.hn.provision_ue(i, ET_UE), self.rng) for i in IMSIS]

    def provision(self):
        return provision_sn(self.sn, self.hn, self.now)


@pytest.fixture
def net():
    return Net()
