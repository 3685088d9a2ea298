"""Brute-force dense reference simulator.

Qubit ordering: site 1 is the leftmost Kronecker factor (most significant
bit of the basis index).  Everything here works on full ``2^N`` matrices and
is meant for validation at small N, not for production scale.
"""

from __future__ import annotations

from functools import reduce

import numpy as np
import scipy.sparse as sp
from scipy.linalg import hadamard

from .flux import ProductState
from .pauli import PauliString, PauliSum

MAX_QUBITS = 12
MAX_FULL_DECOMPOSE = 8
DECOMPOSE_TOL = 1e-12

PAULI_MATRICES = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


class OracleCapError(ValueError):
    """System too large for the dense oracle."""


def _check_cap(n: int, cap: int) -> None:
    if n > cap:
        raise OracleCapError(f"{n} qubits exceeds the dense-oracle cap of {cap}")


def string_matrix(p: PauliString) -> np.ndarray:
    """Dense Kronecker product of the single-site matrices of ``p``."""
    return reduce(np.kron, [PAULI_MATRICES[ch] for ch in p.letters])


def realize(h: PauliSum | PauliString, cap: int = MAX_QUBITS) -> np.ndarray:
    """Dense matrix of a Pauli sum (or single string)."""
    if isinstance(h, PauliString):
        h = PauliSum(h.num_qubits, [(h, 1.0)])
    n = h.num_qubits
    _check_cap(n, cap)
    dim = 2**n
    total = sp.csr_matrix((dim, dim), dtype=complex)
    for string, coeff in h.items():
        factors = [sp.csr_matrix(PAULI_MATRICES[ch]) for ch in string.letters]
        total = total + coeff * reduce(lambda a, b: sp.kron(a, b, format="csr"), factors)
    return total.toarray()


class Propagator:
    """``U(t) = exp(-i H t)`` from one Hermitian eigendecomposition."""

    def __init__(self, hmat: np.ndarray):
        self.energies, self.vectors = np.linalg.eigh(hmat)

    def __call__(self, t: float) -> np.ndarray:
        return (self.vectors * np.exp(-1j * self.energies * t)) @ self.vectors.conj().T

    def evolve_state(self, psi: np.ndarray, t: float) -> np.ndarray:
        return self.vectors @ (np.exp(-1j * self.energies * t) * (self.vectors.conj().T @ psi))


def propagator(hmat: np.ndarray, t: float) -> np.ndarray:
    return Propagator(hmat)(t)


def heisenberg_operator(h: PauliSum | np.ndarray, sigma: PauliString | np.ndarray, t: float) -> np.ndarray:
    """``U(t)^dag sigma U(t)``."""
    hmat = realize(h) if isinstance(h, PauliSum) else h
    smat = string_matrix(sigma) if isinstance(sigma, PauliString) else sigma
    u = propagator(hmat, t)
    return u.conj().T @ smat @ u


def _num_qubits(m: np.ndarray) -> int:
    dim = m.shape[0]
    n = dim.bit_length() - 1
    if m.shape != (dim, dim) or 2**n != dim:
        raise ValueError(f"operator of shape {m.shape} is not 2^N x 2^N")
    return n


def _trace_with(string: PauliString, m: np.ndarray) -> complex:
    # Tr(P M) = i^{|x&z|} sum_b (-1)^{z.b} M[b, b^x]
    b = np.arange(m.shape[0])
    signs = 1 - 2 * (np.bitwise_count(b & string.z) & 1).astype(np.int64)
    phase = 1j ** (bin(string.x & string.z).count("1") % 4)
    return phase * np.dot(signs, m[b, b ^ string.x])


def pauli_decompose(m: np.ndarray, nodes=None, tol: float = DECOMPOSE_TOL) -> dict[PauliString, complex]:
    """Coefficients ``c_P = Tr(P M) / 2^N``.

    Without ``nodes`` all ``4^N`` strings are scanned (N <= 8) and only
    entries with ``|c_P| > tol`` are returned.  With ``nodes`` the listed
    strings are evaluated (N <= 12) and all of them are returned.
    """
    n = _num_qubits(m)
    dim = 2**n
    if nodes is not None:
        _check_cap(n, MAX_QUBITS)
        return {p: _trace_with(p, m) / dim for p in nodes}
    _check_cap(n, MAX_FULL_DECOMPOSE)
    b = np.arange(dim)
    # column x holds M[b, b^x]; a Walsh-Hadamard transform over b yields every z
    shifted = m[b[:, None], b[:, None] ^ b[None, :]]
    sums = hadamard(dim) @ shifted
    out: dict[PauliString, complex] = {}
    for x in range(dim):
        for z in range(dim):
            c = (1j ** (bin(x & z).count("1") % 4)) * sums[z, x] / dim
            if abs(c) > tol:
                out[PauliString(n, x, z)] = complex(c)
    return dict(sorted(out.items()))


def reconstruct(coeffs: dict[PauliString, complex], n: int) -> np.ndarray:
    out = np.zeros((2**n, 2**n), dtype=complex)
    for p, c in coeffs.items():
        out += c * string_matrix(p)
    return out


def register_vector(state: ProductState | np.ndarray) -> np.ndarray:
    if isinstance(state, ProductState):
        return state.amplitudes()
    psi = np.asarray(state, dtype=complex)
    if abs(np.linalg.norm(psi) - 1.0) > 1e-12:
        raise ValueError("register state must have unit norm")
    return psi


def flux_via_oracle(h: PauliSum, output_site: int, output_letter: str, input_letter: str,
                    register_state: ProductState | np.ndarray, t: float) -> float:
    """Flux from a full operator-basis decomposition, for any register state.

    The register state lives on sites 2..N and may be entangled.
    """
    n = h.num_qubits
    _check_cap(n, MAX_FULL_DECOMPOSE)
    psi = register_vector(register_state)
    if psi.shape != (2 ** (n - 1),):
        raise ValueError(f"register state must have {2 ** (n - 1)} amplitudes")
    seed = PauliString.single(n, output_site, output_letter)
    coeffs = pauli_decompose(heisenberg_operator(h, seed, t))
    total = 0j
    for p, c in coeffs.items():
        if p.letter(1) != input_letter:
            continue
        rest = string_matrix(p.restrict(range(2, n + 1)))
        total += c * np.vdot(psi, rest @ psi)
    return float(total.real)


def reduced_density_matrix(psi: np.ndarray, site: int, n: int) -> np.ndarray:
    """Single-site reduced state by reshaping over the fixed qubit order."""
    t = psi.reshape(2 ** (site - 1), 2, 2 ** (n - site))
    return np.einsum("aib,ajb->ij", t, t.conj())


def transfer_input_state(n: int) -> np.ndarray:
    """``|1>_1 |0...0>``."""
    psi = np.zeros(2**n, dtype=complex)
    psi[2 ** (n - 1)] = 1.0
    return psi


def fidelity_series(h: PauliSum, times) -> np.ndarray:
    """Population of ``|1>`` on the last site after sending ``|1>`` from site 1."""
    n = h.num_qubits
    _check_cap(n, MAX_QUBITS)
    prop = Propagator(realize(h))
    psi0 = transfer_input_state(n)
    out = []
    for t in np.atleast_1d(np.asarray(times, dtype=float)):
        rho = reduced_density_matrix(prop.evolve_state(psi0, t), n, n)
        out.append(rho[1, 1].real)
    return np.array(out)


def worst_case_fidelity(h: PauliSum, t: float) -> float:
    return float(fidelity_series(h, [t])[0])
