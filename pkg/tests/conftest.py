import random
from fractions import Fraction

import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from patrolgame.core import CONTINUOUS, make_instance

settings.register_profile(
    "default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


def instance_a():
    """One round, space {0,1,2}, one patrol, unit targets at both ends."""
    return make_instance(T=1, M=2, K=1, D=0, R=0, positions=[[0], [2]])


@pytest.fixture
def inst_a():
    return instance_a()


def random_instance(rng: random.Random, T, M, K, n, weights=(1, 2, 3, 4, 5), max_D=None, max_R=None):
    """Random discrete instance with integer data, sizes exactly as given."""
    max_D = max(1, M // 3) if max_D is None else max_D
    max_R = min(2, M) if max_R is None else max_R
    return make_instance(
        T=T,
        M=M,
        K=K,
        D=rng.randint(0, max_D),
        R=rng.randint(0, max_R),
        positions=[[rng.randint(0, M) for _ in range(T)] for _ in range(n)],
        weights=[[rng.choice(weights) for _ in range(T)] for _ in range(n)],
    )


def random_fractional_instance(rng: random.Random, T, M, K, n, den=4):
    """Discrete instance whose targets, speed and radius are multiples of 1/den."""

    def frac(hi):
        return Fraction(rng.randint(0, hi * den), den)

    return make_instance(
        T=T,
        M=M,
        K=K,
        D=frac(max(1, M // 2)),
        R=frac(1),
        positions=[[frac(M) for _ in range(T)] for _ in range(n)],
        weights=[[rng.randint(0, 4) for _ in range(T)] for _ in range(n)],
    )


def random_continuous_instance(rng: random.Random, T, n, K, dens=(1, 2, 3, 4, 6)):
    d = rng.choice(dens)
    M = Fraction(rng.randint(1, 4 * d), d)

    def frac(hi):
        q = rng.choice(dens)
        return Fraction(rng.randint(0, int(hi * q)), q)

    return make_instance(
        T=T,
        M=M,
        K=K,
        D=frac(M),
        R=frac(Fraction(1)),
        positions=[[frac(M) for _ in range(T)] for _ in range(n)],
        weights=[[rng.randint(1, 3) for _ in range(T)] for _ in range(n)],
        mode=CONTINUOUS,
    )


@st.composite
def small_instances(draw, max_T=3, max_M=6, max_K=2, max_n=2, fractional=False):
    T = draw(st.integers(1, max_T))
    M = draw(st.integers(0, max_M))
    K = draw(st.integers(1, max_K))
    n = draw(st.integers(1, max_n))
    den = 4 if fractional else 1
    pos = st.integers(-den, (M + 1) * den).map(lambda v: Fraction(v, den))
    return make_instance(
        T=T,
        M=M,
        K=K,
        D=draw(st.integers(0, 3 * den).map(lambda v: Fraction(v, den))),
        R=draw(st.integers(0, 2 * den).map(lambda v: Fraction(v, den))),
        positions=[[draw(pos) for _ in range(T)] for _ in range(n)],
        weights=[[draw(st.integers(0, 3)) for _ in range(T)] for _ in range(n)],
    )
