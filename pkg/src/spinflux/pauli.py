"""Exact algebra of N-qubit Pauli strings.

A :class:`PauliString` is stored as two bitmasks (``x``, ``z``) with site 1 in
the most significant bit, so the integer masks line up with the row index
ordering of the dense Kronecker realization used by :mod:`spinflux.oracle`.
Phases of products are kept as an exponent of ``i`` modulo 4.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping

LETTERS = "IXYZ"
_LETTER_BITS = {"I": (0, 0), "X": (1, 0), "Y": (1, 1), "Z": (0, 1)}
_PHASES = (1 + 0j, 1j, -1 + 0j, -1j)
_TOKEN = re.compile(r"^([IXYZ])(\d+)$")


class DimensionError(ValueError):
    """Raised when operands act on different numbers of qubits."""


def _popcount(v: int) -> int:
    return bin(v).count("1")


@dataclass(frozen=True, slots=True)
class PauliString:
    """Phase-free tensor product of I, X, Y, Z over ``num_qubits`` sites."""

    num_qubits: int
    x: int = 0
    z: int = 0

    def __post_init__(self):
        if self.num_qubits < 1:
            raise ValueError("num_qubits must be positive")
        full = (1 << self.num_qubits) - 1
        if self.x & ~full or self.z & ~full:
            raise ValueError("bitmask exceeds num_qubits")

    @classmethod
    def from_letters(cls, letters: str) -> "PauliString":
        """Build from a dense letter sequence, e.g. ``"XZZ"`` (site 1 first)."""
        x = z = 0
        for ch in letters.upper():
            if ch not in _LETTER_BITS:
                raise ValueError(f"invalid Pauli letter {ch!r}")
            bx, bz = _LETTER_BITS[ch]
            x = (x << 1) | bx
            z = (z << 1) | bz
        return cls(len(letters), x, z)

    @classmethod
    def identity(cls, num_qubits: int) -> "PauliString":
        return cls(num_qubits)

    @classmethod
    def single(cls, num_qubits: int, site: int, letter: str) -> "PauliString":
        """The string with ``letter`` on ``site`` (1-based) and identities elsewhere."""
        letters = ["I"] * num_qubits
        _check_site(site, num_qubits)
        letters[site - 1] = letter
        return cls.from_letters("".join(letters))

    @classmethod
    def parse(cls, text: str, num_qubits: int) -> "PauliString":
        """Parse the site-indexed form, e.g. ``"X1 Z2 Z3"`` or ``"I"``."""
        text = text.strip()
        letters = ["I"] * num_qubits
        if text in ("", "I"):
            return cls(num_qubits)
        for token in text.replace("*", " ").split():
            m = _TOKEN.match(token.upper())
            if m is None:
                raise ValueError(f"cannot parse Pauli token {token!r}")
            letter, site = m.group(1), int(m.group(2))
            _check_site(site, num_qubits)
            if letters[site - 1] != "I":
                raise ValueError(f"site {site} given twice in {text!r}")
            letters[site - 1] = letter
        return cls.from_letters("".join(letters))

    def _bit(self, site: int) -> int:
        return 1 << (self.num_qubits - site)

    def letter(self, site: int) -> str:
        _check_site(site, self.num_qubits)
        b = self._bit(site)
        return _letter_of(bool(self.x & b), bool(self.z & b))

    @property
    def letters(self) -> str:
        return "".join(self.letter(j) for j in range(1, self.num_qubits + 1))

    @property
    def weight(self) -> int:
        return _popcount(self.x | self.z)

    def is_identity(self) -> bool:
        return not (self.x | self.z)

    def support(self) -> list[int]:
        return [j for j in range(1, self.num_qubits + 1) if (self.x | self.z) & self._bit(j)]

    def commutes_with(self, other: "PauliString") -> bool:
        _check_dims(self, other)
        return (_popcount(self.x & other.z) + _popcount(self.z & other.x)) % 2 == 0

    def restrict(self, sites: Iterable[int]) -> "PauliString":
        """Sub-string on ``sites`` (kept in the given order)."""
        return PauliString.from_letters("".join(self.letter(j) for j in sites))

    def sort_key(self) -> tuple[int, ...]:
        return tuple(LETTERS.index(ch) for ch in self.letters)

    def __lt__(self, other: "PauliString") -> bool:
        return (self.num_qubits, self.sort_key()) < (other.num_qubits, other.sort_key())

    def __mul__(self, other: "PauliString") -> "PhasedPauli":
        return multiply(self, other)

    def __str__(self) -> str:
        parts = [f"{self.letter(j)}{j}" for j in self.support()]
        return " ".join(parts) if parts else "I"

    def __repr__(self) -> str:
        return f"PauliString({self.letters!r})"


def _letter_of(x: bool, z: bool) -> str:
    if x:
        return "Y" if z else "X"
    return "Z" if z else "I"


def _check_site(site: int, n: int) -> None:
    if not 1 <= site <= n:
        raise IndexError(f"site {site} outside 1..{n}")


def _check_dims(p: PauliString, q: PauliString) -> None:
    if p.num_qubits != q.num_qubits:
        raise DimensionError(f"{p.num_qubits}-qubit and {q.num_qubits}-qubit strings")


@dataclass(frozen=True, slots=True)
class PhasedPauli:
    """``scale * i**power * string`` with ``power`` in 0..3 and integer ``scale``.

    Products always have ``scale == 1``; commutators carry ``scale == 2``.
    """

    power: int
    string: PauliString
    scale: int = 1

    def __post_init__(self):
        object.__setattr__(self, "power", self.power % 4)

    @property
    def phase(self) -> complex:
        return _PHASES[self.power]

    @property
    def coefficient(self) -> complex:
        return self.scale * _PHASES[self.power]

    def __mul__(self, other: "PhasedPauli") -> "PhasedPauli":
        prod = multiply(self.string, other.string)
        return PhasedPauli(self.power + other.power + prod.power, prod.string, self.scale * other.scale)

    def __str__(self) -> str:
        sign = ("+", "+i", "-", "-i")[self.power]
        mag = "" if self.scale == 1 else f"{self.scale}"
        return f"{sign}{mag} {self.string}"


def multiply(p: PauliString, q: PauliString) -> PhasedPauli:
    """Exact product ``p q``.

    Uses ``P = i**|x&z| X^x Z^z`` on each string; moving ``Z^z1`` past
    ``X^x2`` costs ``(-1)**|z1&x2|``.
    """
    _check_dims(p, q)
    x3, z3 = p.x ^ q.x, p.z ^ q.z
    power = (
        _popcount(p.x & p.z)
        + _popcount(q.x & q.z)
        + 2 * _popcount(p.z & q.x)
        - _popcount(x3 & z3)
    )
    return PhasedPauli(power, PauliString(p.num_qubits, x3, z3))


def commutator(p: PauliString, q: PauliString) -> PhasedPauli | None:
    """``[p, q]``; ``None`` when the strings commute, else ``2 p q``."""
    if p.commutes_with(q):
        return None
    prod = multiply(p, q)
    return PhasedPauli(prod.power, prod.string, 2)


def site_letter(p: PauliString, j: int) -> str:
    return p.letter(j)


class PauliSum:
    """Real-weighted sum of Pauli strings sharing one qubit count.

    Zero coefficients are dropped; iteration follows lexicographic order of
    the letter sequences.
    """

    __slots__ = ("num_qubits", "_terms")

    def __init__(self, num_qubits: int, terms: Mapping[PauliString, float] | Iterable[tuple[PauliString, float]] = ()):
        self.num_qubits = num_qubits
        acc: dict[PauliString, float] = {}
        items = terms.items() if isinstance(terms, Mapping) else terms
        for string, coeff in items:
            if string.num_qubits != num_qubits:
                raise DimensionError(f"term {string} does not act on {num_qubits} qubits")
            if isinstance(coeff, complex):
                if coeff.imag != 0:
                    raise ValueError("PauliSum coefficients must be real")
                coeff = coeff.real
            acc[string] = acc.get(string, 0.0) + float(coeff)
        self._terms = {s: acc[s] for s in sorted(acc) if acc[s] != 0.0}

    @property
    def terms(self) -> dict[PauliString, float]:
        return dict(self._terms)

    def items(self):
        return self._terms.items()

    def strings(self) -> list[PauliString]:
        return list(self._terms)

    def coefficient(self, string: PauliString) -> float:
        return self._terms.get(string, 0.0)

    def __len__(self) -> int:
        return len(self._terms)

    def __iter__(self) -> Iterator[tuple[PauliString, float]]:
        return iter(self._terms.items())

    def __eq__(self, other) -> bool:
        if not isinstance(other, PauliSum):
            return NotImplemented
        return self.num_qubits == other.num_qubits and self._terms == other._terms

    def __add__(self, other: "PauliSum") -> "PauliSum":
        if self.num_qubits != other.num_qubits:
            raise DimensionError("cannot add sums on different qubit counts")
        return PauliSum(self.num_qubits, list(self.items()) + list(other.items()))

    def __mul__(self, scalar: float) -> "PauliSum":
        return PauliSum(self.num_qubits, [(s, c * scalar) for s, c in self.items()])

    __rmul__ = __mul__

    def __neg__(self) -> "PauliSum":
        return self * -1.0

    def __str__(self) -> str:
        if not self._terms:
            return "0"
        return " + ".join(f"{c!r}*({s})" for s, c in self.items())

    def __repr__(self) -> str:
        return f"PauliSum({self.num_qubits}, {{{', '.join(f'{s.letters!r}: {c!r}' for s, c in self.items())}}})"


def commutator_with_sum(h: PauliSum, p: PauliString) -> dict[PauliString, complex]:
    """``[h, p]`` as a map from string to complex coefficient, sorted by string."""
    if h.num_qubits != p.num_qubits:
        raise DimensionError(f"{h.num_qubits}-qubit sum and {p.num_qubits}-qubit string")
    out: dict[PauliString, complex] = {}
    for s, c in h.items():
        comm = commutator(s, p)
        if comm is not None:
            out[comm.string] = out.get(comm.string, 0j) + c * comm.coefficient
    return {s: out[s] for s in sorted(out) if out[s] != 0}
