import numpy as np
import pytest

from properclock.states import ClockFiducial, GaussianPacket, Scenario


def make_scenario(pa, da, pb=0.0, db=None, sigma=1.0):
    fid = ClockFiducial(sigma)
    return Scenario(1.0, GaussianPacket(pa, da), GaussianPacket(pb, da if db is None else db), fid, fid)


@pytest.fixture
def rng():
    return np.random.default_rng(2024)
