import numpy as np
import pytest

from vatsim.microdata import Household, MicrodataSet, SyntheticParams, generate_synthetic
from vatsim.rates import ItemCode, RateSchedule, default_schedule


@pytest.fixture(scope="session")
def tiny_schedule():
    return RateSchedule(
        [
            (ItemCode("std_a", "other_food"), 0.20),
            (ItemCode("std_b", "clothing"), 0.10),
            (ItemCode("basket_a", "basic_food_basket", frozenset({"basket"})), 0.135),
            (ItemCode("tob", "tobacco_alcohol", frozenset({"tobacco_alcohol"})), 0.409),
            (ItemCode("energy", "electricity_gas", frozenset({"energy_gas"})), 0.338),
            (ItemCode("dom", "household_goods_services", frozenset({"domestic_service"})), 0.0),
            (ItemCode("fin", "other_goods_services", frozenset({"financial_health"})), 0.17628),
            (ItemCode("r40", "education", frozenset({"educ_health_meds_transit_culture"})), 0.045),
            (ItemCode("r70", "other_goods_services", frozenset({"professional_services"})), 0.10),
        ]
    )


@pytest.fixture(scope="session")
def schedule():
    return default_schedule()


@pytest.fixture(scope="session")
def synth():
    """Mid-size synthetic set with income-deficit households."""
    return generate_synthetic(2000, 5, SyntheticParams(deficit_fraction=0.2))


@pytest.fixture(scope="session")
def synth_small():
    return generate_synthetic(300, 9)


def make_set(schedule, households):
    return MicrodataSet.from_households(households, schedule)


@pytest.fixture
def build(tiny_schedule):
    def _build(*households):
        return make_set(tiny_schedule, households)

    return _build


@pytest.fixture
def hh():
    def _hh(id, expenditures=(), weight=1.0, size=1, y=1000.0, y_nonmon=0.0):
        return Household(id, weight, size, y, y_nonmon, tuple(expenditures))

    return _hh
