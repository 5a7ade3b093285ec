"""Strategies and random fixture builders shared by the test modules."""
import numpy as np
from hypothesis import strategies as st

from fuzzyerm import Example, FuzzyLabel, Interval, Trapezoid

finite = st.floats(-50, 50, allow_nan=False, allow_infinity=False)
level = st.floats(1e-6, 1.0, allow_nan=False, exclude_min=False)


@st.composite
def trapezoids(draw, lo=-20.0, hi=20.0):
    pts = sorted(draw(st.lists(st.floats(lo, hi, allow_nan=False), min_size=4, max_size=4)))
    return Trapezoid(*pts)


@st.composite
def intervals(draw, lo=-20.0, hi=20.0):
    a, b = sorted(draw(st.lists(st.floats(lo, hi, allow_nan=False), min_size=2, max_size=2)))
    return Interval(a, b)


def random_trapezoid(rng, scale=5.0):
    return Trapezoid(*np.sort(rng.uniform(-scale, scale, 4)))


def random_fuzzy_regression(rng, n=5, p=2, fuzzy_input=False):
    data = []
    for _ in range(n):
        x = []
        for _ in range(p):
            r = rng.random()
            if fuzzy_input and r < 0.3:
                x.append(random_trapezoid(rng, 2.0))
            elif r < 0.6:
                lo = rng.uniform(-2, 2)
                x.append(Interval(lo, lo + rng.uniform(0, 1)))
            else:
                x.append(float(rng.uniform(-2, 2)))
        data.append(Example(tuple(x), random_trapezoid(rng)))
    return data


def random_fuzzy_labels(rng, n=6, p=2):
    data = []
    for _ in range(n):
        x = tuple(float(v) for v in rng.normal(size=p))
        obs = 1 if rng.random() < 0.5 else -1
        data.append(Example(x, FuzzyLabel.discounted(obs, float(rng.random()))))
    return data

