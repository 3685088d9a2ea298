import math

import numpy as np
import pytest
from hypothesis import strategies as st

from spinflux.pauli import PauliString, PauliSum


def pauli_strings(n: int):
    return st.text(alphabet="IXYZ", min_size=n, max_size=n).map(PauliString.from_letters)


@st.composite
def string_pairs(draw, max_qubits: int = 6):
    n = draw(st.integers(1, max_qubits))
    return draw(pauli_strings(n)), draw(pauli_strings(n))


@st.composite
def pauli_sums(draw, max_qubits: int = 5):
    n = draw(st.integers(1, max_qubits))
    strings = draw(st.lists(pauli_strings(n), min_size=0, max_size=6))
    coeffs = draw(st.lists(st.floats(-3, 3, allow_nan=False), min_size=len(strings), max_size=len(strings)))
    return PauliSum(n, list(zip(strings, coeffs)))


def P(text: str, n: int) -> PauliString:
    return PauliString.parse(text, n)


@pytest.fixture
def t_star_xx3():
    return math.pi / (2 * math.sqrt(2))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
