"""Coefficient evolution on a closure and the information flux it carries.

The flux from input letter ``S'`` on qubit 1 to an output observable is the
sum, over closure nodes whose site-1 letter is ``S'``, of the node
coefficient times the expectation of the node's remaining factors (sites
2..N) in the known register state.
"""

from __future__ import annotations

import csv
import io
import math
import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.linalg import expm

from .chains import apply_phase_correction
from .closure import DEFAULT_MAX_NODES, ClosureGraph, GeneratorMatrix, build_closure, generator_matrix
from .pauli import PauliString, PauliSum

BLOCH_TOL = 1e-12
DEFAULT_CUTOFF = 60


class TruncationWarning(RuntimeWarning):
    """Taylor cutoff is too small for the requested time."""


@dataclass(frozen=True)
class CoefficientVector:
    """Real coefficients ``gamma_j(t)`` aligned with ``nodes``."""

    nodes: tuple[PauliString, ...]
    time: float
    values: np.ndarray

    def __post_init__(self):
        if len(self.values) != len(self.nodes):
            raise ValueError("coefficient vector length does not match node count")

    def __getitem__(self, string: PauliString) -> float:
        return float(self.values[self.nodes.index(string)])

    def get(self, string: PauliString, default: float = 0.0) -> float:
        try:
            return self[string]
        except ValueError:
            return default

    def as_dict(self) -> dict[PauliString, float]:
        return {p: float(v) for p, v in zip(self.nodes, self.values)}

    def norm_squared(self) -> float:
        return float(np.dot(self.values, self.values))


def _matrix(a: GeneratorMatrix | np.ndarray) -> tuple[np.ndarray, tuple]:
    if isinstance(a, GeneratorMatrix):
        return a.matrix, a.nodes
    a = np.asarray(a, dtype=float)
    return a, tuple(range(a.shape[0]))


def seed_vector(dim: int, seed_index: int = 0) -> np.ndarray:
    v = np.zeros(dim)
    v[seed_index] = 1.0
    return v


def evolve_taylor(a: GeneratorMatrix | np.ndarray, t: float, m: int = DEFAULT_CUTOFF,
                  initial: np.ndarray | None = None) -> CoefficientVector:
    """Truncated series ``sum_{l=0}^{m} (t^l / l!) A^l gamma(0)``.

    Warns with :class:`TruncationWarning` when ``t * ||A||_2 > m / e``, where
    the partial sums have not yet started to converge.
    """
    mat, nodes = _matrix(a)
    if m < 0:
        raise ValueError("cutoff must be >= 0")
    gamma0 = seed_vector(mat.shape[0]) if initial is None else np.asarray(initial, dtype=float)
    if mat.size and abs(t) * np.linalg.norm(mat, 2) > m / math.e:
        warnings.warn(f"cutoff M={m} is below e*||A||*t; the series may be far from converged",
                      TruncationWarning, stacklevel=2)
    term = gamma0.copy()
    total = gamma0.copy()
    for l in range(1, m + 1):
        term = (t / l) * (mat @ term)
        total += term
    return CoefficientVector(nodes, float(t), total)


def recurrence_coefficients(rates: Sequence[Sequence], m: int, initial: Sequence) -> list[list]:
    """Terms ``gamma^(l) = R gamma^(l-1)`` for ``l = 0..m`` in plain arithmetic.

    Works with any numeric-like entries (ints, Fractions, sympy symbols).
    With ``R = A / 2`` the series ``sum_l (2t)^l / l! gamma^(l)`` is the
    Taylor expansion of the exact evolution.
    """
    dim = len(initial)
    out = [list(initial)]
    for _ in range(m):
        prev = out[-1]
        out.append([sum((rates[j][k] * prev[k] for k in range(dim) if rates[j][k] != 0), 0) for j in range(dim)])
    return out


class ExactEvolution:
    """``exp(t A) gamma(0)``, factorised once and evaluated at many times.

    Antisymmetric ``A`` goes through the Hermitian eigendecomposition of
    ``iA``; anything else falls back to scaling-and-squaring per time.
    """

    def __init__(self, a: GeneratorMatrix | np.ndarray, initial: np.ndarray | None = None):
        self.matrix, self.nodes = _matrix(a)
        dim = self.matrix.shape[0]
        self.initial = seed_vector(dim) if initial is None else np.asarray(initial, dtype=float)
        self.antisymmetric = bool(np.allclose(self.matrix, -self.matrix.T, rtol=0.0, atol=1e-14))
        if self.antisymmetric and dim:
            self._w, self._v = np.linalg.eigh(1j * self.matrix)
            self._c = self._v.conj().T @ self.initial

    def values(self, times) -> np.ndarray:
        """Coefficient matrix of shape ``(len(times), dim)``."""
        times = np.atleast_1d(np.asarray(times, dtype=float))
        dim = self.matrix.shape[0]
        if dim == 0:
            return np.zeros((len(times), 0))
        if self.antisymmetric:
            phases = np.exp(-1j * np.outer(times, self._w))
            out = ((phases * self._c) @ self._v.T).real
        else:
            out = np.array([expm(t * self.matrix) @ self.initial for t in times])
        out[times == 0.0] = self.initial
        return out

    def __call__(self, t: float) -> CoefficientVector:
        return CoefficientVector(self.nodes, float(t), self.values([t])[0])


def evolve_exact(a: GeneratorMatrix | np.ndarray, t: float, initial: np.ndarray | None = None) -> CoefficientVector:
    return ExactEvolution(a, initial)(t)


def _string(letters: str) -> PauliString:
    return PauliString.from_letters(letters)


def closed_form_coefficients(model: str, t: float, j: float = 1.0, letter: str = "X") -> CoefficientVector:
    """Known analytic coefficients, ordered from the site-1 string to the seed.

    ``xx3_uniform``: three-qubit XX chain with equal couplings ``j``; seed
    ``X3`` (``letter="X"``) or ``Y3`` (``letter="Y"``).
    ``christandl5``: five-qubit chain with ``J_k = j sqrt(k (5 - k))``, seed ``X5``.
    """
    if model == "xx3_uniform":
        w = math.sqrt(2.0) * j * t
        s2, c2 = math.sin(w) ** 2, math.cos(w) ** 2
        mid = math.sin(2.0 * w) / math.sqrt(2.0)
        if letter == "X":
            nodes = (_string("XZZ"), _string("IYZ"), _string("IIX"))
            vals = [-s2, mid, c2]
        elif letter == "Y":
            nodes = (_string("YZZ"), _string("IXZ"), _string("IIY"))
            vals = [-s2, -mid, c2]
        else:
            raise ValueError(f"xx3_uniform has no closed form for letter {letter!r}")
    elif model == "christandl5":
        if letter != "X":
            raise ValueError("christandl5 closed form is tabulated for the X5 seed only")
        s, c = math.sin(2.0 * j * t), math.cos(2.0 * j * t)
        nodes = tuple(_string(x) for x in ("XZZZZ", "IYZZZ", "IIXZZ", "IIIYZ", "IIIIX"))
        vals = [s**4, -2.0 * c * s**3, -math.sqrt(3.0 / 8.0) * math.sin(4.0 * j * t) ** 2, 2.0 * c**3 * s, c**4]
    else:
        raise ValueError(f"unknown closed-form model {model!r}")
    return CoefficientVector(nodes, float(t), np.array(vals))


@dataclass(frozen=True)
class ProductState:
    """Pure product state of register sites 2..N, one Bloch vector per site.

    Basis bit 0 is ``(0, 0, 1)`` and bit 1 is ``(0, 0, -1)``.
    """

    bloch: tuple[tuple[float, float, float], ...]

    def __post_init__(self):
        for k, v in enumerate(self.bloch):
            if len(v) != 3:
                raise ValueError(f"site {k + 2}: Bloch vector needs 3 components")
            if abs(math.sqrt(sum(c * c for c in v)) - 1.0) > BLOCH_TOL:
                raise ValueError(f"site {k + 2}: Bloch vector {v} is not a unit vector")

    @classmethod
    def from_bits(cls, bits: str | Sequence[int]) -> "ProductState":
        vecs = []
        for b in bits:
            b = int(b)
            if b not in (0, 1):
                raise ValueError(f"basis bit must be 0 or 1, got {b}")
            vecs.append((0.0, 0.0, 1.0 - 2.0 * b))
        return cls(tuple(vecs))

    @classmethod
    def zeros(cls, num_sites: int) -> "ProductState":
        return cls.from_bits([0] * num_sites)

    def __len__(self) -> int:
        return len(self.bloch)

    def amplitudes(self) -> np.ndarray:
        """State vector on sites 2..N, site 2 most significant."""
        psi = np.ones(1, dtype=complex)
        for x, y, z in self.bloch:
            theta = math.atan2(math.hypot(x, y), z)
            phi = math.atan2(y, x)
            psi = np.kron(psi, [math.cos(theta / 2), np.exp(1j * phi) * math.sin(theta / 2)])
        return psi


_AXIS = {"X": 0, "Y": 1, "Z": 2}


def product_expectation(p: PauliString, state: ProductState) -> float:
    """``<psi| p |psi>`` on sites 2..N; a site-1 factor of ``p`` is ignored."""
    offset = p.num_qubits - len(state)
    if offset not in (0, 1):
        raise ValueError(f"{p.num_qubits}-qubit string against a {len(state)}-site register")
    value = 1.0
    for k, vec in enumerate(state.bloch):
        letter = p.letter(k + 1 + offset)
        if letter != "I":
            value *= vec[_AXIS[letter]]
            if value == 0.0:
                return 0.0
    return value


def information_flux(g: ClosureGraph | Sequence[PauliString], coeffs: CoefficientVector,
                     input_letter: str, state: ProductState) -> float:
    """Flux into the closure's seed from ``input_letter`` on qubit 1."""
    nodes = g.nodes if isinstance(g, ClosureGraph) else tuple(g)
    if tuple(coeffs.nodes) != tuple(nodes):
        raise ValueError("coefficients are not aligned with the graph nodes")
    return float(sum(c * product_expectation(p, state)
                     for p, c in zip(nodes, coeffs.values) if p.letter(1) == input_letter))


def flux_weights(nodes: Sequence[PauliString], input_letter: str, state: ProductState) -> np.ndarray:
    """Per-node contraction weights; flux is ``weights @ gamma``."""
    return np.array([product_expectation(p, state) if p.letter(1) == input_letter else 0.0 for p in nodes])


@dataclass(frozen=True)
class FluxSeries:
    times: np.ndarray
    flux: np.ndarray
    input_letter: str
    output_letter: str
    output_site: int
    method: str = "exact"
    corrected: bool = False
    node_count: int = 0
    meta: dict = field(default_factory=dict, compare=False)

    def __len__(self) -> int:
        return len(self.times)

    def to_csv(self) -> str:
        return write_csv(["t", "flux"], [self.times, self.flux])


def write_csv(header: Sequence[str], columns: Sequence[Sequence[float]]) -> str:
    """Comma-separated table with round-trip float formatting."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in zip(*columns):
        w.writerow([repr(float(v)) for v in row])
    return buf.getvalue()


def _check_grid(times) -> np.ndarray:
    times = np.asarray(times, dtype=float).reshape(-1)
    if len(times) > 1 and np.any(np.diff(times) <= 0):
        raise ValueError("time grid must be strictly increasing")
    return times


def _evolve_grid(a: GeneratorMatrix, times: np.ndarray, method: str, cutoff: int) -> np.ndarray:
    if method == "exact":
        return ExactEvolution(a).values(times) if len(times) else np.zeros((0, a.dimension))
    if method == "taylor":
        return np.array([evolve_taylor(a, t, cutoff).values for t in times]).reshape(len(times), a.dimension)
    raise ValueError(f"unknown method {method!r}; expected 'exact' or 'taylor'")


def flux_series(h: PauliSum, output_site: int, output_letter: str, input_letter: str,
                state: ProductState | None, t_grid, method: str = "exact", cutoff: int = DEFAULT_CUTOFF,
                corrected: bool = False, max_nodes: int = DEFAULT_MAX_NODES) -> FluxSeries:
    """Flux ``I^{S S'}_i(t)`` on a time grid.

    With ``corrected=True`` the output observable is first conjugated by the
    receiver phase gate on the last qubit; by linearity the flux is the same
    combination of the fluxes of the resulting strings.
    """
    n = h.num_qubits
    times = _check_grid(t_grid)
    state = ProductState.zeros(n - 1) if state is None else state
    if len(state) != n - 1:
        raise ValueError(f"register state covers {len(state)} sites, chain needs {n - 1}")
    seed = PauliString.single(n, output_site, output_letter)
    seeds = apply_phase_correction(seed, n) if corrected else PauliSum(n, [(seed, 1.0)])
    flux = np.zeros(len(times))
    sizes = []
    for string, weight in seeds.items():
        g = build_closure(h, string, max_nodes)
        a = generator_matrix(g)
        sizes.append(len(g))
        gammas = _evolve_grid(a, times, method, cutoff)
        flux += weight * (gammas @ flux_weights(g.nodes, input_letter, state)) if len(times) else 0.0
    return FluxSeries(times, flux, input_letter, output_letter, output_site, method, corrected,
                      node_count=max(sizes, default=0))
