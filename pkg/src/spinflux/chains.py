"""Spin-chain Hamiltonians, coupling patterns and the receiver phase correction.

Sites and couplings are 1-based: ``J_k`` couples sites ``k`` and ``k+1``.
Units have hbar = 1.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Sequence

from .pauli import DimensionError, PauliString, PauliSum

MODELS = ("xx", "heisenberg", "generic")


class ConfigError(ValueError):
    """Invalid chain or run configuration."""


@dataclass(frozen=True)
class ChainSpec:
    """Description of a chain Hamiltonian.

    ``couplings`` is used by the ``xx`` and ``heisenberg`` models, ``terms`` by
    ``generic``.  ``fields`` adds ``B_j Z_j`` for every model. ``labels`` maps a
    term (by position in ``terms``) to a display symbol for DOT export.
    """

    num_qubits: int
    model: str = "xx"
    couplings: tuple[float, ...] = ()
    terms: tuple[tuple[float, PauliString], ...] = ()
    fields: tuple[float, ...] = ()
    labels: tuple[str | None, ...] = field(default=(), compare=False)

    def __post_init__(self):
        n = self.num_qubits
        if self.model not in MODELS:
            raise ConfigError(f"unknown model {self.model!r}; expected one of {', '.join(MODELS)}")
        if n < 1:
            raise ConfigError("n must be positive")
        if self.model in ("xx", "heisenberg"):
            if n < 2:
                raise ConfigError(f"{self.model} chain needs n >= 2")
            if len(self.couplings) != n - 1:
                raise ConfigError(f"{self.model} chain with n={n} needs {n - 1} couplings, got {len(self.couplings)}")
        for _, s in self.terms:
            if s.num_qubits != n:
                raise ConfigError(f"term {s} acts on {s.num_qubits} qubits, chain has {n}")
        if self.fields and len(self.fields) != n:
            raise ConfigError(f"fields needs {n} entries, got {len(self.fields)}")

    def term_list(self) -> list[tuple[float, PauliString, str | None]]:
        """Canonical (coeff, string, label) list with the model sugar expanded."""
        n = self.num_qubits
        out: list[tuple[float, PauliString, str | None]] = []
        if self.model in ("xx", "heisenberg"):
            letters = "XY" if self.model == "xx" else "XYZ"
            for k, jk in enumerate(self.couplings, start=1):
                for a in letters:
                    out.append((float(jk), _bond(n, k, a), f"J{k}"))
        else:
            labels = list(self.labels) + [None] * (len(self.terms) - len(self.labels))
            out.extend((float(c), s, lab) for (c, s), lab in zip(self.terms, labels))
        for j, b in enumerate(self.fields, start=1):
            out.append((float(b), PauliString.single(n, j, "Z"), f"B{j}"))
        return out

    def expanded(self) -> "ChainSpec":
        """Equivalent ``generic`` spec."""
        tl = self.term_list()
        return ChainSpec(self.num_qubits, "generic", terms=tuple((c, s) for c, s, _ in tl),
                         labels=tuple(lab for _, _, lab in tl))

    def coupling_labels(self) -> dict[PauliString, str]:
        """Symbol per Hamiltonian string, for edge labels. Clashing symbols are joined."""
        out: dict[PauliString, str] = {}
        for _, s, lab in self.term_list():
            if lab is None:
                continue
            if s in out and out[s] != lab:
                out[s] = f"{out[s]}+{lab}"
            else:
                out[s] = lab
        return out

    def hamiltonian(self) -> PauliSum:
        return build_generic(self)

    def to_dict(self) -> dict[str, Any]:
        """Generic term-list serialization (the canonical config form)."""
        g = self.expanded()
        terms = []
        for (c, s), lab in zip(g.terms, g.labels):
            entry: dict[str, Any] = {"coeff": c, "string": str(s)}
            if lab is not None:
                entry["label"] = lab
            terms.append(entry)
        return {"n": self.num_qubits, "model": "generic", "terms": terms}


def _bond(n: int, k: int, letter: str) -> PauliString:
    letters = ["I"] * n
    letters[k - 1] = letters[k] = letter
    return PauliString.from_letters("".join(letters))


def _check_couplings(n: int, couplings: Sequence[float]) -> None:
    if n < 2:
        raise ValueError("a chain needs at least 2 qubits")
    if len(couplings) != n - 1:
        raise ValueError(f"n={n} needs {n - 1} couplings, got {len(couplings)}")


def build_xx_chain(n: int, couplings: Sequence[float]) -> PauliSum:
    """``sum_k J_k (X_k X_{k+1} + Y_k Y_{k+1})``."""
    _check_couplings(n, couplings)
    return PauliSum(n, [(_bond(n, k, a), j) for k, j in enumerate(couplings, start=1) for a in "XY"])


def build_heisenberg_chain(n: int, couplings: Sequence[float]) -> PauliSum:
    """Isotropic exchange ``sum_k J_k (XX + YY + ZZ)`` on each bond."""
    _check_couplings(n, couplings)
    return PauliSum(n, [(_bond(n, k, a), j) for k, j in enumerate(couplings, start=1) for a in "XYZ"])


def christandl_couplings(n: int, j: float = 1.0) -> tuple[float, ...]:
    """Perfect-transfer pattern ``J_k = j * sqrt(k (n - k))`` for ``k = 1..n-1``."""
    if n < 2:
        raise ValueError("a chain needs at least 2 qubits")
    return tuple(j * math.sqrt(k * (n - k)) for k in range(1, n))


def uniform_couplings(n: int, j: float = 1.0) -> tuple[float, ...]:
    if n < 2:
        raise ValueError("a chain needs at least 2 qubits")
    return (float(j),) * (n - 1)


def build_generic(spec: ChainSpec) -> PauliSum:
    """Assemble the spec's terms; repeated strings are summed."""
    try:
        return PauliSum(spec.num_qubits, [(s, c) for c, s, _ in spec.term_list()])
    except DimensionError as exc:
        raise ConfigError(str(exc)) from exc


def _phase_cos_sin(n: int) -> tuple[int, int]:
    # cos and sin of pi*(n-1)/2, exact
    return ((1, 0), (0, 1), (-1, 0), (0, -1))[(n - 1) % 4]


def apply_phase_correction(target: PauliString | PauliSum, n: int | None = None) -> PauliSum:
    """Conjugate by the receiver gate ``diag(1, exp(i pi (n-1)/2))`` on the last site.

    ``X_n -> cos X_n - sin Y_n`` and ``Y_n -> sin X_n + cos Y_n`` with the angle
    ``pi (n-1)/2``; ``Z_n`` and ``I_n`` are untouched.  A bare string comes back
    as a one-term (or two-term) :class:`PauliSum`, since the map can change sign.
    """
    if isinstance(target, PauliString):
        target = PauliSum(target.num_qubits, [(target, 1.0)])
    n = target.num_qubits if n is None else n
    if n != target.num_qubits:
        raise DimensionError(f"correction for n={n} applied to {target.num_qubits}-qubit operator")
    c, s = _phase_cos_sin(n)
    out: list[tuple[PauliString, float]] = []
    for string, coeff in target.items():
        letter = string.letter(n)
        if letter not in "XY":
            out.append((string, coeff))
            continue
        with_x = PauliString.from_letters(string.letters[:-1] + "X")
        with_y = PauliString.from_letters(string.letters[:-1] + "Y")
        if letter == "X":
            out += [(with_x, c * coeff), (with_y, -s * coeff)]
        else:
            out += [(with_x, s * coeff), (with_y, c * coeff)]
    return PauliSum(n, out)


def chain_spec_from_dict(data: dict[str, Any]) -> ChainSpec:
    """Build a :class:`ChainSpec` from a config mapping.

    Recognised keys: ``n``, ``model``, ``couplings`` (list, or the name of a
    pattern: ``"christandl"`` / ``"uniform"`` scaled by ``j``), ``j``,
    ``terms`` (list of ``{"coeff", "string", "label"?}``), ``fields``.
    """
    if "n" not in data:
        raise ConfigError("missing key 'n'")
    n = data["n"]
    if not isinstance(n, int) or isinstance(n, bool) or n < 1:
        raise ConfigError(f"'n' must be a positive integer, got {n!r}")
    model = data.get("model", "generic" if "terms" in data else "xx")
    couplings = data.get("couplings", ())
    if isinstance(couplings, str):
        j = _number(data.get("j", 1.0), "j")
        if couplings == "christandl":
            couplings = christandl_couplings(n, j) if n >= 2 else ()
        elif couplings == "uniform":
            couplings = uniform_couplings(n, j) if n >= 2 else ()
        else:
            raise ConfigError(f"unknown coupling pattern {couplings!r}")
    if not isinstance(couplings, (list, tuple)):
        raise ConfigError("'couplings' must be a list or a pattern name")
    couplings = tuple(_number(c, f"couplings[{i}]") for i, c in enumerate(couplings))
    terms = []
    labels = []
    for i, entry in enumerate(data.get("terms", ()) or ()):
        if not isinstance(entry, dict) or "coeff" not in entry or "string" not in entry:
            raise ConfigError(f"terms[{i}] must be an object with 'coeff' and 'string'")
        try:
            s = PauliString.parse(str(entry["string"]), n)
        except (ValueError, IndexError) as exc:
            raise ConfigError(f"terms[{i}].string: {exc}") from exc
        terms.append((_number(entry["coeff"], f"terms[{i}].coeff"), s))
        labels.append(entry.get("label"))
    fields = tuple(_number(b, f"fields[{i}]") for i, b in enumerate(data.get("fields", ()) or ()))
    return ChainSpec(n, model, couplings, tuple(terms), fields, tuple(labels))


def _number(v: Any, where: str) -> float:
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{where} must be a number, got {v!r}")
    if not math.isfinite(v):
        raise ConfigError(f"{where} must be finite")
    return float(v)


def load_json(path: str | Path) -> dict[str, Any]:
    text = Path(path).read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be a JSON object")
    return data


def load_chain_config(path: str | Path) -> ChainSpec:
    return chain_spec_from_dict(load_json(path))
