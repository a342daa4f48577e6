"""Hypothesis strategies shared by the test modules."""

from hypothesis import strategies as st

from phragmen_lab.election import Election


@st.composite
def elections(draw, max_n=8, max_m=6):
    m = draw(st.integers(1, max_m))
    n = draw(st.integers(1, max_n))
    ballots = [
        draw(st.frozensets(st.integers(0, m - 1), min_size=1, max_size=m)) for _ in range(n)
    ]
    k = draw(st.integers(1, m))
    return Election(tuple(f"c{i + 1}" for i in range(m)), tuple(ballots), k)
