import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from radshock.baby import AMPLITUDE_MAX, BabySystem, baby_energy_check, baby_reduced
from radshock.errors import DegenerateShockError, DiscriminantError, DomainError
from radshock.glue import resample
from radshock.pipeline import baby_profile
from radshock.reduced import equilibria


def test_node_ordinate_closed_form():
    rep = equilibria(baby_reduced(0.5))
    assert rep.w0 == pytest.approx(-0.14644660940672623780, rel=1e-14)
    assert rep.glue_derivative == 0.0


@settings(max_examples=40, deadline=None)
@given(st.floats(1e-4, 0.66))
def test_node_ordinate_property(a):
    w0 = equilibria(baby_reduced(a)).w0
    assert w0 == pytest.approx(-a * a / (1 + math.sqrt(1 - 2 * a * a)), rel=1e-14)
    assert w0 * w0 + w0 + a * a / 2 == pytest.approx(0.0, abs=1e-15)


def test_threshold_refused():
    assert AMPLITUDE_MAX == pytest.approx(1 / math.sqrt(2))
    with pytest.raises(DiscriminantError) as info:
        baby_reduced(0.8)
    assert info.value.details["a_max"] == pytest.approx(AMPLITUDE_MAX)
    with pytest.raises(DiscriminantError):
        baby_reduced(np.nextafter(AMPLITUDE_MAX, 1.0))
    with pytest.raises(DegenerateShockError):
        baby_reduced(0.0)
    with pytest.raises(DomainError):
        baby_reduced(float("nan"))


def test_system_validation():
    s = BabySystem(1.5, 0.5)
    assert s.a == 0.5 and s.s == 1.0
    with pytest.raises(DomainError):
        BabySystem(0.0, 1.0)
    with pytest.raises(DegenerateShockError):
        BabySystem(1.0, 1.0)


def test_first_integral(baby):
    assert baby_energy_check(baby.profile) <= 1e-8


def test_linear_scheme_second_order(baby):
    e1 = baby_energy_check(resample(baby.native, points_per_thickness=20), hermite=False)
    e2 = baby_energy_check(resample(baby.native, points_per_thickness=40), hermite=False)
    assert 3.5 < e1 / e2 < 4.5


def test_fields(baby):
    p = baby.profile
    a = p.a
    assert p.fields["q"][p.i0] == pytest.approx(a * a / 2, rel=1e-15)
    assert np.all(p.fields["q"] >= 0)
    assert abs(p.fields["u"][0] - 0.5) < 1e-6 and abs(p.fields["u"][-1] + 0.5) < 1e-6


def test_shifted_speed():
    r = baby_profile(0.3, s=2.0)
    u = r.profile.fields["u"]
    assert abs(u[0] - 2.3) < 1e-6 and abs(u[-1] - 1.7) < 1e-6
    assert r.verification.ok


def test_node_ordering_refused_below_threshold():
    from radshock.errors import AmplitudeTooLargeError
    with pytest.raises(AmplitudeTooLargeError):
        equilibria(baby_reduced(0.68))
