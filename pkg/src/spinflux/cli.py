"""Command-line front end: ``spinflux graph|flux|fidelity|compare|verify``.

Run settings come from a JSON config file (``--config``) and/or flags; each
flag mirrors the config key of the same name (dashes for underscores) and
wins over the file.  Exit codes: 0 ok, 1 invalid input, 2 computation error,
3 verification failure.
"""

from __future__ import annotations

import argparse
import ast
import math
import operator
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from .chains import ChainSpec, ConfigError, chain_spec_from_dict, load_json
from .closure import DEFAULT_MAX_NODES, ClosureError, build_closure, export_dot
from .flux import DEFAULT_CUTOFF, ProductState, flux_series, write_csv
from .oracle import MAX_QUBITS, OracleCapError, fidelity_series
from .pauli import PauliString

EXIT_OK, EXIT_INVALID, EXIT_COMPUTE, EXIT_VERIFY = 0, 1, 2, 3

CHAIN_KEYS = ("n", "model", "couplings", "j", "terms", "fields")

_BINOPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul, ast.Div: operator.truediv,
           ast.Pow: operator.pow}


def parse_number(text: str) -> float:
    """Arithmetic on numbers and ``pi``, e.g. ``"3*pi"`` or ``"pi/(2*2**0.5)"``."""
    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)) and not isinstance(node.value, bool):
            return float(node.value)
        if isinstance(node, ast.Name) and node.id == "pi":
            return math.pi
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            v = ev(node.operand)
            return -v if isinstance(node.op, ast.USub) else v
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            return _BINOPS[type(node.op)](ev(node.left), ev(node.right))
        raise ValueError
    try:
        value = ev(ast.parse(str(text).strip(), mode="eval"))
    except (SyntaxError, ValueError, ZeroDivisionError):
        raise ConfigError(f"cannot read {text!r} as a number") from None
    if not math.isfinite(value):
        raise ConfigError(f"{text!r} is not finite")
    return value


def parse_grid(spec: Any) -> np.ndarray:
    """``"start:stop:points"`` (or a mapping with those keys) to an inclusive grid."""
    if isinstance(spec, dict):
        parts = [spec.get("start", 0.0), spec.get("stop"), spec.get("points")]
    else:
        parts = str(spec).split(":")
    if len(parts) != 3 or parts[1] is None or parts[2] is None:
        raise ConfigError(f"grid must be start:stop:points, got {spec!r}")
    start, stop = (p if isinstance(p, (int, float)) else parse_number(p) for p in parts[:2])
    try:
        points = int(parts[2])
    except (TypeError, ValueError):
        raise ConfigError(f"grid points must be an integer, got {parts[2]!r}") from None
    if points < 1:
        raise ConfigError("grid needs at least 1 point")
    if points > 1 and stop <= start:
        raise ConfigError("grid stop must exceed start")
    return np.linspace(start, stop, points)


def parse_register(spec: Any, num_sites: int) -> ProductState:
    """Bit string (``"00"``) or per-site Bloch triples (``"0,0,1;1,0,0"`` or nested lists)."""
    if spec is None:
        return ProductState.zeros(num_sites)
    try:
        if isinstance(spec, str) and all(ch in "01" for ch in spec.strip()):
            state = ProductState.from_bits(spec.strip())
        else:
            rows = spec if isinstance(spec, list) else [r.split(",") for r in str(spec).split(";")]
            state = ProductState(tuple(tuple(float(parse_number(c)) for c in row) for row in rows))
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"register: {exc}") from exc
    if len(state) != num_sites:
        raise ConfigError(f"register must describe {num_sites} sites (2..{num_sites + 1}), got {len(state)}")
    return state


@dataclass(frozen=True)
class RunConfig:
    chain: ChainSpec
    output_site: int
    output_letter: str
    input_letter: str
    register: ProductState
    grid: np.ndarray
    method: str = "exact"
    cutoff: int = DEFAULT_CUTOFF
    max_nodes: int = DEFAULT_MAX_NODES
    corrected: bool = False
    seed: PauliString | None = None
    out: str | None = None

    @property
    def seed_string(self) -> PauliString:
        if self.seed is not None:
            return self.seed
        return PauliString.single(self.chain.num_qubits, self.output_site, self.output_letter)


def _letter(value: Any, key: str) -> str:
    letter = str(value).upper()
    if letter not in ("X", "Y", "Z"):
        raise ConfigError(f"{key} must be X, Y or Z, got {value!r}")
    return letter


def _int(value: Any, key: str, lo: int = 0) -> int:
    if isinstance(value, bool):
        raise ConfigError(f"{key} must be an integer")
    try:
        v = int(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{key} must be an integer, got {value!r}") from None
    if v != float(value) or v < lo:
        raise ConfigError(f"{key} must be an integer >= {lo}, got {value!r}")
    return v


def _bool(value: Any, key: str) -> bool:
    if isinstance(value, bool):
        return value
    if str(value).lower() in ("1", "true", "yes"):
        return True
    if str(value).lower() in ("0", "false", "no"):
        return False
    raise ConfigError(f"{key} must be a boolean, got {value!r}")


def merged_settings(args: argparse.Namespace) -> dict[str, Any]:
    data: dict[str, Any] = load_json(args.config) if getattr(args, "config", None) else {}
    for key, value in vars(args).items():
        if key in ("config", "command", "func", "list", "checks") or value is None:
            continue
        if key == "couplings" and isinstance(value, str) and value not in ("christandl", "uniform"):
            value = [parse_number(v) for v in value.split(",") if v.strip()]
        elif key == "fields" and isinstance(value, str):
            value = [parse_number(v) for v in value.split(",") if v.strip()]
        elif key == "j" and isinstance(value, str):
            value = parse_number(value)
        data[key] = value
    return data


def build_run_config(data: dict[str, Any], default_grid: str | None = "0:pi:201") -> RunConfig:
    if "terms" in data and data.get("model") in (None, "generic") and "couplings" not in data:
        data = {**data, "model": "generic"}
    chain = chain_spec_from_dict({k: data[k] for k in CHAIN_KEYS if k in data})
    n = chain.num_qubits
    output_site = _int(data.get("output_site", n), "output_site", 1)
    if output_site > n:
        raise ConfigError(f"output_site {output_site} outside 1..{n}")
    method = str(data.get("method", "exact"))
    if method not in ("exact", "taylor"):
        raise ConfigError(f"method must be 'exact' or 'taylor', got {method!r}")
    seed = None
    if data.get("seed") is not None:
        try:
            seed = PauliString.parse(str(data["seed"]), n)
        except (ValueError, IndexError) as exc:
            raise ConfigError(f"seed: {exc}") from exc
    grid_spec = data.get("grid", default_grid)
    return RunConfig(
        chain=chain,
        output_site=output_site,
        output_letter=_letter(data.get("output_letter", "X"), "output_letter"),
        input_letter=_letter(data.get("input_letter", "X"), "input_letter"),
        register=parse_register(data.get("register"), n - 1),
        grid=parse_grid(grid_spec) if grid_spec is not None else np.zeros(0),
        method=method,
        cutoff=_int(data.get("cutoff", DEFAULT_CUTOFF), "cutoff"),
        max_nodes=_int(data.get("max_nodes", DEFAULT_MAX_NODES), "max_nodes", 1),
        corrected=_bool(data.get("corrected", False), "corrected"),
        seed=seed,
        out=data.get("out"),
    )


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _note(message: str, out: str | None) -> None:
    print(message, file=sys.stderr if not out else sys.stdout)


def cmd_graph(cfg: RunConfig) -> int:
    g = build_closure(cfg.chain.hamiltonian(), cfg.seed_string, cfg.max_nodes)
    _emit(export_dot(g, cfg.chain.coupling_labels()), cfg.out)
    _note(f"closure of {cfg.seed_string}: {len(g)} nodes, {len(g.edges)} edges", cfg.out)
    return EXIT_OK


def _flux(cfg: RunConfig):
    if cfg.chain.num_qubits < 2:
        raise ConfigError("flux needs at least 2 qubits")
    return flux_series(cfg.chain.hamiltonian(), cfg.output_site, cfg.output_letter, cfg.input_letter,
                       cfg.register, cfg.grid, cfg.method, cfg.cutoff, cfg.corrected, cfg.max_nodes)


def _fidelity(cfg: RunConfig) -> np.ndarray:
    if cfg.chain.num_qubits > MAX_QUBITS:
        raise OracleCapError(f"{cfg.chain.num_qubits} qubits exceeds the dense-oracle cap of {MAX_QUBITS}")
    return fidelity_series(cfg.chain.hamiltonian(), cfg.grid)


def cmd_flux(cfg: RunConfig) -> int:
    _emit(_flux(cfg).to_csv(), cfg.out)
    return EXIT_OK


def cmd_fidelity(cfg: RunConfig) -> int:
    _emit(write_csv(["t", "fidelity"], [cfg.grid, _fidelity(cfg)]), cfg.out)
    return EXIT_OK


def compare_summary(times: np.ndarray, flux: np.ndarray, fid: np.ndarray) -> str:
    i_flux = int(np.argmax(np.abs(flux)))
    i_fid = int(np.argmax(fid))
    return (f"argmax |flux|: t={float(times[i_flux])!r} |flux|={float(abs(flux[i_flux]))!r}; "
            f"argmax fidelity: t={float(times[i_fid])!r} fidelity={float(fid[i_fid])!r}; "
            f"distance: {abs(i_flux - i_fid)} grid steps")


def cmd_compare(cfg: RunConfig) -> int:
    series = _flux(cfg)
    fid = _fidelity(cfg)
    _emit(write_csv(["t", "flux", "fidelity"], [cfg.grid, series.flux, fid]), cfg.out)
    _note(compare_summary(cfg.grid, series.flux, fid), cfg.out)
    return EXIT_OK


def cmd_verify(names: Sequence[str] | None = None, list_only: bool = False) -> int:
    from .verification import CHECKS, run_checks

    if list_only:
        for name in CHECKS:
            print(name)
        return EXIT_OK
    unknown = [n for n in names or () if n not in CHECKS]
    if unknown:
        raise ConfigError(f"unknown checks: {', '.join(unknown)}")
    results = run_checks(names or None)
    for r in results:
        print(r.line())
    failed = sum(not r.passed for r in results)
    print(f"{len(results) - failed}/{len(results)} checks passed")
    return EXIT_OK if not failed else EXIT_VERIFY


def _add_run_options(p: argparse.ArgumentParser, grid: bool = True) -> None:
    p.add_argument("--config", help="JSON run/chain config file")
    p.add_argument("--out", help="output path (default: stdout)")
    p.add_argument("--n", type=int, help="number of qubits")
    p.add_argument("--model", choices=("xx", "heisenberg", "generic"))
    p.add_argument("--couplings", help="comma-separated J_1..J_{n-1}, or 'christandl' / 'uniform'")
    p.add_argument("--j", help="base strength for a coupling pattern")
    p.add_argument("--fields", help="comma-separated per-site Z fields")
    p.add_argument("--output-site", dest="output_site", type=int)
    p.add_argument("--output-letter", dest="output_letter")
    p.add_argument("--max-nodes", dest="max_nodes", type=int)
    if grid:
        p.add_argument("--input-letter", dest="input_letter")
        p.add_argument("--register", help="bits like 00, or Bloch triples 'x,y,z;x,y,z'")
        p.add_argument("--grid", help="start:stop:points, pi allowed (e.g. 0:3*pi:2000)")
        p.add_argument("--method", choices=("exact", "taylor"))
        p.add_argument("--cutoff", type=int, help="Taylor cutoff M")
        p.add_argument("--corrected", action="store_true", default=None,
                       help="apply the receiver phase correction before evaluating the flux")


class _Parser(argparse.ArgumentParser):
    """Usage errors are validation errors (exit 1), not argparse's default 2."""

    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


def make_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="spinflux", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("graph", help="write the closure graph as DOT")
    _add_run_options(p, grid=False)
    p.add_argument("--seed", help="seed string, e.g. 'X5' or 'I' (default: output letter on output site)")
    for name, text in (("flux", "t,flux CSV"), ("fidelity", "t,fidelity CSV"),
                       ("compare", "t,flux,fidelity CSV and peak summary")):
        _add_run_options(sub.add_parser(name, help=text))
    p = sub.add_parser("verify", help="run the reference checks")
    p.add_argument("--list", action="store_true", help="print check names only")
    p.add_argument("checks", nargs="*", help="subset of checks to run")
    return parser


COMMANDS = {"graph": cmd_graph, "flux": cmd_flux, "fidelity": cmd_fidelity, "compare": cmd_compare}


def main(argv: Sequence[str] | None = None) -> int:
    args = make_parser().parse_args(argv)
    try:
        if args.command == "verify":
            return cmd_verify(args.checks, args.list)
        cfg = build_run_config(merged_settings(args), default_grid=None if args.command == "graph" else "0:pi:201")
    except (ConfigError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    try:
        return COMMANDS[args.command](cfg)
    except (ClosureError, OracleCapError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_COMPUTE
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
