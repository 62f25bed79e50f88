"""Golden market fixtures used throughout the suite.

All of them are rational-valued so the exact LP mode is exercised by
default; float twins are obtained by json-roundtripping through floats.
"""

import copy

import pytest

from condual.market import build_market


def binomial_spec(constraint=None):
    """One-period binomial: S0 = 1, up to 2 (dS = +1) w.p. 1/2,
    down to 1/2 (dS = -1/2) w.p. 1/2."""
    constraint = constraint or {"type": "box", "lower": ["-inf"], "upper": ["inf"]}
    return {
        "horizon": 1,
        "dimension": 1,
        "nodes": [
            {"id": "root", "time": 0, "parent": None, "prob": 1, "prices": [1]},
            {"id": "up", "time": 1, "parent": "root", "prob": "1/2", "prices": [2]},
            {"id": "down", "time": 1, "parent": "root", "prob": "1/2",
             "prices": ["1/2"]},
        ],
        "constraints": {"root": constraint},
    }


def deterministic_spec():
    """Two-period deterministic trend: prices follow the time index and the
    holding is capped at 1 each period."""
    cap = {"type": "box", "lower": ["-inf"], "upper": [1]}
    return {
        "horizon": 2,
        "dimension": 1,
        "nodes": [
            {"id": "t0", "time": 0, "parent": None, "prob": 1, "prices": [0]},
            {"id": "t1", "time": 1, "parent": "t0", "prob": 1, "prices": [1]},
            {"id": "t2", "time": 2, "parent": "t1", "prob": 1, "prices": [2]},
        ],
        "constraints": {"t0": cap, "t1": cap},
    }


def drift_spec(constraint=None):
    """One-period market whose increments are both positive (no martingale
    measure exists); default holding constraint [-1, 1]."""
    constraint = constraint or {"type": "box", "lower": [-1], "upper": [1]}
    return {
        "horizon": 1,
        "dimension": 1,
        "nodes": [
            {"id": "root", "time": 0, "parent": None, "prob": 1, "prices": [1]},
            {"id": "up", "time": 1, "parent": "root", "prob": "1/2", "prices": [2]},
            {"id": "down", "time": 1, "parent": "root", "prob": "1/2",
             "prices": ["3/2"]},
        ],
        "constraints": {"root": constraint},
    }


def two_period_spec(constraint=None):
    """Recombining-free two-period binary tree with rational data."""
    constraint = constraint or {"type": "box", "lower": [-2], "upper": [2]}
    return {
        "horizon": 2,
        "dimension": 1,
        "nodes": [
            {"id": "r", "time": 0, "parent": None, "prob": 1, "prices": [1]},
            {"id": "u", "time": 1, "parent": "r", "prob": "1/2", "prices": [2]},
            {"id": "d", "time": 1, "parent": "r", "prob": "1/2", "prices": ["1/2"]},
            {"id": "uu", "time": 2, "parent": "u", "prob": "1/3", "prices": [3]},
            {"id": "ud", "time": 2, "parent": "u", "prob": "2/3", "prices": ["3/2"]},
            {"id": "du", "time": 2, "parent": "d", "prob": "1/2", "prices": [1]},
            {"id": "dd", "time": 2, "parent": "d", "prob": "1/2", "prices": ["1/4"]},
        ],
        "constraints": {"default": constraint},
    }


@pytest.fixture
def b1():
    return build_market(binomial_spec())


@pytest.fixture
def b1_pinned():
    return build_market(binomial_spec({"type": "singleton", "point": [1]}))


@pytest.fixture
def b1_box():
    return build_market(binomial_spec({"type": "box", "lower": [-1], "upper": [1]}))


@pytest.fixture
def d1():
    return build_market(deterministic_spec())


@pytest.fixture
def drift_market():
    return build_market(drift_spec())


@pytest.fixture
def arbitrage_market():
    return build_market(drift_spec({"type": "box", "lower": ["-inf"],
                                    "upper": ["inf"]}))


@pytest.fixture
def two_period():
    return build_market(two_period_spec())


def float_copy(spec):
    """Replace rational strings by floats: the float-mode twin of a spec."""
    from fractions import Fraction

    def conv(v):
        if isinstance(v, str):
            try:
                return float(Fraction(v))
            except ValueError:
                return v
        if isinstance(v, list):
            return [conv(x) for x in v]
        if isinstance(v, dict):
            return {k: conv(x) for k, x in v.items()}
        if isinstance(v, int) and not isinstance(v, bool):
            return float(v)
        return v

    spec = copy.deepcopy(spec)
    spec["nodes"] = conv(spec["nodes"])
    spec["constraints"] = conv(spec["constraints"])
    spec["horizon"] = int(spec["horizon"])
    spec["dimension"] = int(spec["dimension"])
    return spec
