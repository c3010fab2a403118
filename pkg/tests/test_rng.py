import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from sublln.rng import MASK64, u64_at, unit_array, unit_at


def test_reference_vector_seed_zero():
    # first outputs of the standard generator seeded with 0
    assert u64_at(0, 0) == 0xE220A8397B1DCDAF
    assert u64_at(0, 1) == 0x6E789E6AA1B965F4
    assert u64_at(0, 2) == 0x06C45D188009454F


def test_units_in_unit_interval():
    u = unit_array(123, 0, 10_000)
    assert u.min() >= 0.0
    assert u.max() < 1.0


@settings(max_examples=50, deadline=None)
@given(
    st.integers(0, MASK64),
    st.integers(0, 10_000),
    st.integers(1, 64),
)
def test_vector_matches_scalar(seed, start, count):
    vec = unit_array(seed, start, count)
    ref = np.array([unit_at(seed, start + i) for i in range(count)])
    assert np.array_equal(vec, ref)


def test_counter_based_random_access():
    seed = 2**63 + 17
    whole = unit_array(seed, 0, 100)
    tail = unit_array(seed, 60, 40)
    assert np.array_equal(whole[60:], tail)


def test_distinct_seeds_distinct_streams():
    assert not np.array_equal(unit_array(1, 0, 32), unit_array(2, 0, 32))


def test_mean_roughly_half():
    u = unit_array(7, 0, 200_000)
    assert abs(float(u.mean()) - 0.5) < 0.005
