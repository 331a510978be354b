"""Shared fixtures and hypothesis strategies."""

import numpy as np
import pytest
from hypothesis import settings, strategies as st

from g2lab.exterior import KForm, masks_of_degree

settings.register_profile("g2lab", max_examples=60, deadline=None)
settings.load_profile("g2lab")

coefficient = st.floats(min_value=-3.0, max_value=3.0, allow_nan=False, allow_infinity=False)


@st.composite
def kforms(draw, dim: int, degree: int | None = None):
    """A random homogeneous form of the given dimension."""
    if degree is None:
        degree = draw(st.integers(min_value=0, max_value=dim))
    masks = masks_of_degree(dim, degree)
    values = draw(st.lists(coefficient, min_size=len(masks), max_size=len(masks)))
    c = np.zeros(1 << dim)
    c[masks] = values
    return KForm(dim, degree, c)


def random_form(rng: np.random.Generator, dim: int, degree: int) -> KForm:
    c = np.zeros(1 << dim)
    masks = masks_of_degree(dim, degree)
    c[masks] = rng.normal(size=len(masks))
    return KForm(dim, degree, c)


def random_spd(rng: np.random.Generator, n: int = 3, shift: float = 0.5) -> np.ndarray:
    X = rng.normal(size=(n, n))
    return X @ X.T + shift * np.eye(n)


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


# -- acceptance summary ----------------------------------------------------------------

ACCEPTANCE_LINES: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[n])
