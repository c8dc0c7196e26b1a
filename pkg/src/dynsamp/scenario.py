"""YAML scenario files.

Example::

    schema_version: 1
    name: geometric-canonical
    spectrum:
      generator: geometric      # geometric | harmonic | linear | expression
      ratio: 0.5
      N: 8
    vectors: canonical          # or {explicit: [[...], ...]}
    grid: {kind: uniform, step: 0.05}
    noise_sigma: 0.01
    trials: 50
    seed: 7
    sweep: [4, 8]

Complex numbers are written ``[re, im]``; a bare real is also accepted.
Explicit spectra use ``spectrum: {explicit: [...]}``. Expression generators
take ``expr`` over ``j`` (1-based index) with ``I``, ``pi``, ``e`` and the
functions ``exp log sqrt sin cos``.
"""

from __future__ import annotations

import ast
import cmath
import math
import operator
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Callable

import numpy as np
import yaml

from .conditions import ConditionConfig
from .discretization import TimeGrid
from .errors import BoundaryEigenvalue, DimensionMismatch, DomainViolation, ParseError, ValidationError
from .frame_analysis import VectorSet
from .operators import Spectrum, geometric, harmonic, linear

SCHEMA_VERSION = 1

_TOP_KEYS = {
    "schema_version", "name", "spectrum", "vectors", "grid", "noise_sigma",
    "trials", "seed", "sweep", "f_true", "config",
}


# --- YAML with line numbers -------------------------------------------------------


class _Doc:
    """Composed YAML tree; maps dotted field paths to 1-based line numbers."""

    def __init__(self, text: str):
        try:
            self.root = yaml.compose(text, Loader=yaml.SafeLoader)
            self.data = yaml.safe_load(text)
        except yaml.MarkedYAMLError as exc:
            mark = exc.problem_mark or exc.context_mark
            raise ParseError(f"malformed YAML: {exc.problem}", line=mark.line + 1 if mark else None) from exc
        except yaml.YAMLError as exc:
            raise ParseError(f"malformed YAML: {exc}") from exc

    def line(self, path: str) -> int | None:
        node = self.root
        if node is None:
            return None
        best = node.start_mark.line + 1
        for part in path.split("."):
            if isinstance(node, yaml.MappingNode):
                nxt = next((v for k, v in node.value if k.value == part), None)
            elif isinstance(node, yaml.SequenceNode) and part.isdigit() and int(part) < len(node.value):
                nxt = node.value[int(part)]
            else:
                nxt = None
            if nxt is None:
                break
            node = nxt
            best = node.start_mark.line + 1
        return best

    def fail(self, message: str, path: str) -> ParseError:
        return ParseError(message, line=self.line(path), field=path)


# --- scalar parsing ------------------------------------------------------------


def _complex(doc: _Doc, value: Any, path: str) -> complex:
    if isinstance(value, bool):
        raise doc.fail("expected a number", path)
    if isinstance(value, (int, float)):
        return complex(value)
    if isinstance(value, list):
        if len(value) != 2 or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in value):
            raise doc.fail("complex numbers are written as two-element [re, im] arrays", path)
        return complex(value[0], value[1])
    raise doc.fail("expected a real number or [re, im]", path)


def _real(doc: _Doc, value: Any, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise doc.fail("expected a real number", path)
    return float(value)


def _int(doc: _Doc, value: Any, path: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise doc.fail("expected an integer", path)
    return value


# --- expression generators ---------------------------------------------------------

_BINOPS = {
    ast.Add: operator.add,
    ast.Sub: operator.sub,
    ast.Mult: operator.mul,
    ast.Div: operator.truediv,
    ast.Pow: operator.pow,
}
_UNARY = {ast.UAdd: operator.pos, ast.USub: operator.neg}
_FUNCS = {"exp": cmath.exp, "log": cmath.log, "sqrt": cmath.sqrt, "sin": cmath.sin, "cos": cmath.cos}
_CONSTS = {"I": 1j, "pi": math.pi, "e": math.e}


def compile_expression(expr: str) -> Callable[[int], complex]:
    """Compile a closed-grammar expression in ``j`` into a generator."""
    try:
        tree = ast.parse(expr, mode="eval")
    except SyntaxError as exc:
        raise ValueError(f"syntax error in expression: {exc.msg}") from exc

    def check(node: ast.AST) -> None:
        if isinstance(node, ast.Expression):
            check(node.body)
        elif isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            check(node.left)
            check(node.right)
        elif isinstance(node, ast.UnaryOp) and type(node.op) in _UNARY:
            check(node.operand)
        elif isinstance(node, ast.Call):
            if not (isinstance(node.func, ast.Name) and node.func.id in _FUNCS) or len(node.args) != 1 or node.keywords:
                raise ValueError("only exp, log, sqrt, sin, cos with one argument are allowed")
            check(node.args[0])
        elif isinstance(node, ast.Name):
            if node.id != "j" and node.id not in _CONSTS:
                raise ValueError(f"unknown name {node.id!r}")
        elif isinstance(node, ast.Constant):
            if isinstance(node.value, bool) or not isinstance(node.value, (int, float, complex)):
                raise ValueError("only numeric literals are allowed")
        else:
            raise ValueError(f"unsupported syntax: {type(node).__name__}")

    check(tree)

    def evaluate(node: ast.AST, j: int) -> complex:
        if isinstance(node, ast.Expression):
            return evaluate(node.body, j)
        if isinstance(node, ast.BinOp):
            return _BINOPS[type(node.op)](evaluate(node.left, j), evaluate(node.right, j))
        if isinstance(node, ast.UnaryOp):
            return _UNARY[type(node.op)](evaluate(node.operand, j))
        if isinstance(node, ast.Call):
            return _FUNCS[node.func.id](evaluate(node.args[0], j))
        if isinstance(node, ast.Name):
            return j if node.id == "j" else _CONSTS[node.id]
        return node.value

    return lambda j: complex(evaluate(tree, j))


# --- scenario ------------------------------------------------------------------


@dataclass(frozen=True)
class Scenario:
    """A validated scenario. ``generator`` is set for generated spectra."""

    name: str
    spectrum: Spectrum
    vectors: VectorSet | None  # None means canonical
    grid: TimeGrid | None = None
    noise_sigma: float = 0.0
    trials: int = 1
    seed: int = 0
    sweep: tuple = ()
    f_true: np.ndarray | None = None
    config: ConditionConfig = field(default_factory=ConditionConfig)
    generator: Callable[[int], complex] | None = None
    source: dict = field(default_factory=dict)

    @property
    def N(self) -> int:
        return self.spectrum.N

    @property
    def m(self) -> int:
        return 1 if self.vectors is None else self.vectors.m

    def spectrum_for(self, n: int) -> Spectrum:
        if self.generator is not None:
            return Spectrum.from_generator(self.generator, n)
        return self.spectrum.truncate(n)

    def vectors_for(self, spec: Spectrum) -> VectorSet:
        if self.vectors is None:
            return VectorSet.canonical(spec)
        if spec.N > self.vectors.N:
            raise DimensionMismatch(f"explicit vectors have N={self.vectors.N}, need {spec.N}")
        return self.vectors.truncate(spec.N)

    def sizes(self) -> list[int]:
        return list(self.sweep) if self.sweep else [self.N]

    def with_overrides(self, seed: int | None = None, sweep=None) -> "Scenario":
        changes = {}
        if seed is not None:
            changes["seed"] = int(seed)
        if sweep is not None:
            changes["sweep"] = _validated_sweep(list(sweep), self.generator is not None, self.N)
        return replace(self, **changes) if changes else self


def _validated_sweep(sweep: list, generated: bool, N: int) -> tuple:
    if any(isinstance(n, bool) or not isinstance(n, int) or n < 1 for n in sweep):
        raise ValidationError("sweep entries must be positive integers", "sweep N >= 1", "sweep")
    if not generated and any(n > N for n in sweep):
        raise ValidationError(f"sweep exceeds the {N} explicit eigenvalues", "sweep N <= len(explicit)", "sweep")
    return tuple(sweep)


def _parse_spectrum(doc: _Doc, node: Any):
    if not isinstance(node, dict):
        raise doc.fail("spectrum must be a mapping", "spectrum")
    if "explicit" in node:
        vals = node["explicit"]
        if not isinstance(vals, list) or not vals:
            raise doc.fail("explicit spectrum must be a nonempty list", "spectrum.explicit")
        lam = [_complex(doc, v, f"spectrum.explicit.{i}") for i, v in enumerate(vals)]
        return np.array(lam), None
    kind = node.get("generator")
    if kind is None:
        raise doc.fail("spectrum needs 'explicit' or 'generator'", "spectrum")
    if "N" not in node:
        raise doc.fail("generated spectra need N", "spectrum.N")
    N = _int(doc, node["N"], "spectrum.N")
    if N < 1:
        raise ValidationError("N must be >= 1", "N >= 1", "spectrum.N")
    scale = _complex(doc, node.get("scale", 1.0), "spectrum.scale")
    shift = _complex(doc, node.get("shift", 0.0), "spectrum.shift")
    if kind == "geometric":
        if "ratio" not in node:
            raise doc.fail("geometric generator needs ratio", "spectrum.ratio")
        gen = geometric(_real(doc, node["ratio"], "spectrum.ratio"), scale, shift)
    elif kind == "harmonic":
        gen = harmonic(scale, shift)
    elif kind == "linear":
        gen = linear(scale, shift)
    elif kind == "expression":
        expr = node.get("expr")
        if not isinstance(expr, str):
            raise doc.fail("expression generator needs a string expr", "spectrum.expr")
        try:
            gen = compile_expression(expr)
        except ValueError as exc:
            raise doc.fail(str(exc), "spectrum.expr") from exc
    else:
        raise doc.fail(f"unknown generator {kind!r}", "spectrum.generator")
    try:
        lam = np.array([gen(j) for j in range(1, N + 1)], dtype=complex)
    except (ArithmeticError, ValueError) as exc:
        raise ValidationError(f"generator failed: {exc}", "finite eigenvalues", "spectrum") from exc
    return lam, gen


def _parse_vectors(doc: _Doc, node: Any, N: int) -> VectorSet | None:
    if node is None or node == "canonical":
        return None
    if not isinstance(node, dict) or "explicit" not in node:
        raise doc.fail("vectors must be 'canonical' or {explicit: [[...], ...]}", "vectors")
    rows = node["explicit"]
    if not isinstance(rows, list) or not rows or not all(isinstance(r, list) for r in rows):
        raise doc.fail("explicit vectors are a list of rows", "vectors.explicit")
    table = [[_complex(doc, v, f"vectors.explicit.{i}.{k}") for k, v in enumerate(r)] for i, r in enumerate(rows)]
    if any(len(r) != N for r in table):
        raise ValidationError(f"every vector row needs {N} entries", "dimensions consistent", "vectors.explicit")
    return VectorSet(np.array(table))


def _parse_grid(doc: _Doc, node: Any) -> TimeGrid | None:
    if node is None:
        return None
    if not isinstance(node, dict):
        raise doc.fail("grid must be a mapping", "grid")
    kind = node.get("kind")
    if kind == "uniform":
        if "step" not in node:
            raise doc.fail("uniform grid needs step", "grid.step")
        cap = node.get("cap")
        return TimeGrid.uniform(_real(doc, node["step"], "grid.step"),
                                None if cap is None else _int(doc, cap, "grid.cap"))
    if kind == "finite":
        pts = node.get("points")
        if not isinstance(pts, list):
            raise doc.fail("finite grid needs a list of points", "grid.points")
        return TimeGrid.finite([_real(doc, p, f"grid.points.{i}") for i, p in enumerate(pts)])
    raise doc.fail("grid kind must be 'uniform' or 'finite'", "grid.kind")


def _parse_config(doc: _Doc, node: Any) -> ConditionConfig:
    if node is None:
        return ConditionConfig()
    if not isinstance(node, dict):
        raise doc.fail("config must be a mapping", "config")
    fields = ConditionConfig.__dataclass_fields__
    kw = {}
    for key, value in node.items():
        if key not in fields:
            raise doc.fail(f"unknown config key {key!r}", f"config.{key}")
        if isinstance(value, list):
            kw[key] = tuple(_real(doc, v, f"config.{key}.{i}") for i, v in enumerate(value))
        else:
            kw[key] = _real(doc, value, f"config.{key}")
    return ConditionConfig(**kw)


def parse_scenario(source: str | Path) -> Scenario:
    """Parse and validate a scenario from a path or from YAML text."""
    if isinstance(source, Path) or (isinstance(source, str) and "\n" not in source and Path(source).is_file()):
        try:
            text = Path(source).read_text()
        except OSError as exc:
            raise ParseError(f"cannot read scenario: {exc}") from exc
    else:
        text = source
    doc = _Doc(text)
    data = doc.data
    if not isinstance(data, dict):
        raise ParseError("scenario must be a mapping at the top level", line=1)
    for key in data:
        if key not in _TOP_KEYS:
            raise doc.fail(f"unknown key {key!r}", str(key))
    version = data.get("schema_version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise doc.fail(f"unsupported schema_version {version!r}", "schema_version")
    name = data.get("name", "scenario")
    if not isinstance(name, str):
        raise doc.fail("name must be a string", "name")
    if "spectrum" not in data:
        raise ParseError("missing required field", field="spectrum")

    lam, gen = _parse_spectrum(doc, data["spectrum"])
    try:
        spectrum = Spectrum(lam)
    except BoundaryEigenvalue as exc:
        raise ValidationError(str(exc), "Re(lambda) > 0", "spectrum") from exc
    except DomainViolation as exc:
        raise ValidationError(str(exc), "finite eigenvalues", "spectrum") from exc

    vectors = _parse_vectors(doc, data.get("vectors", "canonical"), spectrum.N)
    grid = _parse_grid(doc, data.get("grid"))
    sigma = _real(doc, data.get("noise_sigma", 0.0), "noise_sigma")
    if sigma < 0 or not math.isfinite(sigma):
        raise ValidationError("noise_sigma must be finite and >= 0", "noise_sigma >= 0", "noise_sigma")
    trials = _int(doc, data.get("trials", 1), "trials")
    if trials < 1:
        raise ValidationError("trials must be >= 1", "trials >= 1", "trials")
    seed = _int(doc, data.get("seed", 0), "seed")
    if seed < 0:
        raise ValidationError("seed must be >= 0", "seed >= 0", "seed")
    sweep_raw = data.get("sweep") or []
    if not isinstance(sweep_raw, list):
        raise doc.fail("sweep must be a list of integers", "sweep")
    sweep = _validated_sweep(sweep_raw, gen is not None, spectrum.N)
    if vectors is not None and sweep and max(sweep) > vectors.N:
        raise ValidationError("sweep exceeds the explicit vector length", "sweep N <= vector length", "sweep")
    f_true = None
    if data.get("f_true") is not None:
        vals = data["f_true"]
        if not isinstance(vals, list):
            raise doc.fail("f_true must be a list", "f_true")
        f_true = np.array([_complex(doc, v, f"f_true.{i}") for i, v in enumerate(vals)])
        if f_true.size != spectrum.N:
            raise ValidationError(f"f_true needs {spectrum.N} entries", "dimensions consistent", "f_true")
    config = _parse_config(doc, data.get("config"))
    return Scenario(
        name=name,
        spectrum=spectrum,
        vectors=vectors,
        grid=grid,
        noise_sigma=sigma,
        trials=trials,
        seed=seed,
        sweep=sweep,
        f_true=f_true,
        config=config,
        generator=gen,
        source=data,
    )
