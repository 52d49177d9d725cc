"""Problem, trace and type files: JSON in, JSON/CSV out.

Rationals travel as strings "a/b" (or "a" when the denominator is 1) with
the sign on the numerator.  A problem chain lists the proper steps Fil^1,
Fil^2, ... as row bases; the full space in front and the zero space at the
end are implicit.  Serialization is canonical (sorted keys, rref bases), so
emitted files round-trip byte for byte.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .descent import Caps, DescentStep, DescentTrace
from .errors import ParseError
from .flags import TypeDatum
from .lattice import KSubspace, Lattice
from .lifting import LiftWitness


@dataclass(frozen=True)
class Problem:
    prime: int
    dim: int
    chains: tuple  # full chains of KSubspace
    lattice: Optional[Lattice]
    caps: Caps


def _is_prime(p: int) -> bool:
    if p < 2:
        return False
    d = 2
    while d * d <= p:
        if p % d == 0:
            return False
        d += 1
    return True


def parse_rational(tok, where: str) -> Fraction:
    if isinstance(tok, int):
        return Fraction(tok)
    if not isinstance(tok, str):
        raise ParseError(f"{where}: expected a rational string, got {tok!r}")
    try:
        return Fraction(tok)
    except (ValueError, ZeroDivisionError):
        raise ParseError(f"{where}: malformed rational {tok!r}") from None


def format_rational(x) -> str:
    return str(Fraction(x))


def _parse_matrix(rows, n: int, where: str) -> tuple:
    if not isinstance(rows, list):
        raise ParseError(f"{where}: expected a list of rows")
    out = []
    for ri, row in enumerate(rows):
        if not isinstance(row, list) or len(row) != n:
            raise ParseError(f"{where}[{ri}]: expected a row of length {n}")
        out.append(tuple(parse_rational(x, f"{where}[{ri}][{ci}]")
                         for ci, x in enumerate(row)))
    return tuple(out)


def parse_problem(data: dict) -> Problem:
    if not isinstance(data, dict):
        raise ParseError("problem file must be a JSON object")
    try:
        p = int(data["p"])
        n = int(data["n"])
        chains_raw = data["chains"]
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"problem file missing or malformed key: {exc}") from None
    if not _is_prime(p):
        raise ParseError(f"p = {p} is not prime")
    if n < 1:
        raise ParseError("n must be at least 1")
    if not isinstance(chains_raw, list) or not chains_raw:
        raise ParseError("chains must be a nonempty list")
    chains = []
    for i, chain_raw in enumerate(chains_raw):
        if not isinstance(chain_raw, list):
            raise ParseError(f"chains[{i}]: expected a list of subspace bases")
        steps = []
        prev = KSubspace.full(n)
        for j, basis in enumerate(chain_raw):
            rows = _parse_matrix(basis, n, f"chains[{i}][{j}]")
            space = KSubspace.from_rows(n, rows)
            if space.dim != len(rows):
                raise ParseError(f"chains[{i}][{j}]: basis rows are dependent")
            from .filtration import contains_space

            if not contains_space(prev.rows, space.rows, None):
                raise ParseError(f"chains[{i}][{j}]: chain is not decreasing")
            steps.append(space)
            prev = space
        while steps and steps[-1].dim == 0:
            steps.pop()
        full = [KSubspace.full(n)] + steps + [KSubspace.zero(n)]
        chains.append(tuple(full))
    lattice = None
    if data.get("lattice") is not None:
        rows = _parse_matrix(data["lattice"], n, "lattice")
        try:
            lattice = Lattice.from_rows(rows)
        except ValueError as exc:
            raise ParseError(f"lattice: {exc}") from None
    caps_raw = data.get("caps") or {}
    if not isinstance(caps_raw, dict):
        raise ParseError("caps must be an object")
    defaults = Caps()
    try:
        caps = Caps(
            enum=int(caps_raw.get("enum", defaults.enum)),
            lift=int(caps_raw.get("lift", defaults.lift)),
            max_iter=int(caps_raw.get("max_iter", defaults.max_iter)),
        )
    except (TypeError, ValueError):
        raise ParseError("caps entries must be integers") from None
    return Problem(p, n, tuple(chains), lattice, caps)


def problem_dict(problem: Problem) -> dict:
    out = {
        "p": problem.prime,
        "n": problem.dim,
        "chains": [
            [
                [[format_rational(x) for x in row] for row in space.rows]
                for space in chain[1:-1]
            ]
            for chain in problem.chains
        ],
        "caps": {
            "enum": problem.caps.enum,
            "lift": problem.caps.lift,
            "max_iter": problem.caps.max_iter,
        },
    }
    if problem.lattice is not None:
        out["lattice"] = [
            [format_rational(x) for x in row] for row in problem.lattice.vectors
        ]
    return out


def dumps_canonical(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=1) + "\n"


def load_problem(path: str) -> Problem:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ParseError(f"{path}: invalid JSON at line {exc.lineno} "
                             f"column {exc.colno}: {exc.msg}") from None
    return parse_problem(data)


# ---------------------------------------------------------------------------
# traces

def _rational_matrix(rows) -> list:
    return [[format_rational(x) for x in row] for row in rows]


def _int_matrix(rows) -> list:
    return [[int(x) for x in row] for row in rows]


def witness_dict(w: LiftWitness) -> dict:
    return {
        "level": w.level,
        "generators": _int_matrix(w.generators),
        "complement": _int_matrix(w.complement),
        "certificates": [
            [i, j, _int_matrix(rows)] for (i, j), rows in w.certificates
        ],
    }


def parse_witness(data: dict, p: int, where: str) -> LiftWitness:
    try:
        level = int(data["level"])
        gens = tuple(tuple(int(x) for x in row) for row in data["generators"])
        comp = tuple(tuple(int(x) for x in row) for row in data["complement"])
        certs = tuple(
            ((int(i), int(j)), tuple(tuple(int(x) for x in row) for row in rows))
            for i, j, rows in data["certificates"]
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"{where}: malformed witness: {exc}") from None
    return LiftWitness(p, level, gens, comp, certs)


def trace_dict(problem: Problem, trace: DescentTrace) -> dict:
    return {
        "problem": problem_dict(problem),
        "steps": [
            {
                "lattice": _rational_matrix(step.lattice.vectors),
                "reduction_dims": [list(c) for c in step.reduction_dims],
                "destabilizer": _int_matrix(step.destabilizer),
                "slope": format_rational(step.slope),
                "dim": step.dim,
                "m": step.level,
                "witness": witness_dict(step.witness),
                "result": _rational_matrix(step.result.vectors),
            }
            for step in trace.steps
        ],
        "final": _rational_matrix(trace.final.vectors),
        "final_dims": [list(c) for c in trace.final_dims],
        "verdict": trace.verdict,
    }


def parse_trace(data: dict) -> tuple:
    """Returns (problem echo dict, DescentTrace without reversed sequences)."""
    if not isinstance(data, dict):
        raise ParseError("trace file must be a JSON object")
    try:
        echo = data["problem"]
        steps_raw = data["steps"]
        final_rows = data["final"]
        final_dims = tuple(tuple(int(x) for x in c) for c in data["final_dims"])
        verdict = data["verdict"]
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"trace file missing or malformed key: {exc}") from None
    problem = parse_problem(echo)
    p, n = problem.prime, problem.dim

    def lat(rows, where):
        try:
            return Lattice.from_rows(_parse_matrix(rows, n, where))
        except ValueError as exc:
            raise ParseError(f"{where}: {exc}") from None

    steps = []
    for k, raw in enumerate(steps_raw):
        where = f"steps[{k}]"
        try:
            step = DescentStep(
                lattice=lat(raw["lattice"], f"{where}.lattice"),
                reduction_dims=tuple(
                    tuple(int(x) for x in c) for c in raw["reduction_dims"]
                ),
                destabilizer=tuple(
                    tuple(int(x) for x in row) for row in raw["destabilizer"]
                ),
                slope=parse_rational(raw["slope"], f"{where}.slope"),
                dim=int(raw["dim"]),
                level=int(raw["m"]),
                witness=parse_witness(raw["witness"], p, f"{where}.witness"),
                result=lat(raw["result"], f"{where}.result"),
                reversed_seq=None,
            )
        except (KeyError, TypeError) as exc:
            raise ParseError(f"{where}: malformed step: {exc}") from None
        steps.append(step)
    trace = DescentTrace(
        p,
        n,
        problem.chains,
        problem.lattice if problem.lattice is not None else Lattice.standard(n),
        tuple(steps),
        lat(final_rows, "final"),
        final_dims,
        verdict,
    )
    return echo, problem, trace


def load_trace(path: str):
    with open(path, "r", encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ParseError(f"{path}: invalid JSON at line {exc.lineno} "
                             f"column {exc.colno}: {exc.msg}") from None
    return parse_trace(data)


# ---------------------------------------------------------------------------
# type files

def parse_type(data: dict, fallback_id: str = "type") -> TypeDatum:
    if not isinstance(data, dict):
        raise ParseError("type file must be a JSON object")
    try:
        s = int(data["s"])
        n = int(data["n"])
        tables = tuple(
            tuple((int(j), int(v)) for j, v in table) for table in data["tables"]
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"type file missing or malformed key: {exc}") from None
    ident = str(data.get("id", fallback_id))
    t = TypeDatum(ident, s, n, tables)
    try:
        t.validate()
    except ValueError as exc:
        raise ParseError(f"type file: {exc}") from None
    return t


def load_type(path: str) -> TypeDatum:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ParseError(f"{path}: invalid JSON at line {exc.lineno} "
                             f"column {exc.colno}: {exc.msg}") from None
    return parse_type(data)
