"""JSON problem configuration: strict parsing, normalisation and round-trip.

Complex numbers are written as a plain number or as ``[re, im]``.  Every
block rejects keys it does not know; errors name the dotted key path.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np

from .entire_fn.product import EntireFunctionSpec
from .entire_fn.zeros import ZeroSequence
from .errors import ConfigError, FracCauchyError
from .operator_model import OperatorSpec, SpectralOperator, assemble
from .solver import CauchyProblem

SCHEMA_VERSION = 1

ZERO_KINDS = {
    "explicit": {"values": list, "complete": bool},
    "power": {"scale": float, "exponent": float, "shift": float, "angles": list},
    "power_log": {"scale": float, "exponent": float, "log_power": float, "shift": float, "angles": list},
    "geometric": {"scale": float, "base": float, "angles": list},
    "cos_sqrt": {},
}


def _reject_unknown(block: dict, allowed, where: str) -> None:
    if not isinstance(block, dict):
        raise ConfigError(f"'{where}' must be an object")
    for key in block:
        if key not in allowed:
            raise ConfigError(f"unknown key '{where}.{key}'" if where else f"unknown key '{key}'")


def _require(block: dict, key: str, where: str):
    if key not in block:
        raise ConfigError(f"missing required key '{where}.{key}'")
    return block[key]


def _number(x, where: str) -> float:
    if isinstance(x, bool) or not isinstance(x, (int, float)) or not math.isfinite(x):
        raise ConfigError(f"'{where}' must be a finite number")
    return float(x)


def _integer(x, where: str) -> int:
    if isinstance(x, bool) or not isinstance(x, int):
        raise ConfigError(f"'{where}' must be an integer")
    return x


def _complex(x, where: str) -> complex:
    if isinstance(x, list):
        if len(x) != 2:
            raise ConfigError(f"'{where}' must be a number or [re, im]")
        return complex(_number(x[0], where), _number(x[1], where))
    return complex(_number(x, where), 0.0)


def _encode_complex(z: complex):
    z = complex(z)
    return z.real if z.imag == 0 else [z.real, z.imag]


def _complex_list(xs, where: str) -> tuple:
    if not isinstance(xs, list):
        raise ConfigError(f"'{where}' must be a list")
    return tuple(_complex(x, f"{where}[{i}]") for i, x in enumerate(xs))


@dataclass(frozen=True)
class ZeroConfig:
    kind: str
    params: tuple = ()  # sorted (name, value) pairs

    @classmethod
    def parse(cls, block, where: str = "function.zeros") -> "ZeroConfig":
        if not isinstance(block, dict):
            raise ConfigError(f"'{where}' must be an object")
        kind = _require(block, "kind", where)
        if kind not in ZERO_KINDS:
            raise ConfigError(f"'{where}.kind' must be one of {sorted(ZERO_KINDS)}")
        schema = ZERO_KINDS[kind]
        _reject_unknown(block, set(schema) | {"kind"}, where)
        params = []
        for key, typ in sorted(schema.items()):
            if key not in block:
                continue
            val = block[key]
            if key == "values":
                val = _complex_list(val, f"{where}.values")
            elif key == "angles":
                if not isinstance(val, list):
                    raise ConfigError(f"'{where}.angles' must be a list")
                val = tuple(_number(a, f"{where}.angles") for a in val)
            elif typ is bool:
                if not isinstance(val, bool):
                    raise ConfigError(f"'{where}.{key}' must be true or false")
            else:
                val = _number(val, f"{where}.{key}")
            params.append((key, val))
        return cls(kind, tuple(params))

    def build(self) -> ZeroSequence:
        kw = dict(self.params)
        if self.kind == "cos_sqrt":
            return ZeroSequence.cos_sqrt()
        if self.kind == "explicit":
            return ZeroSequence.explicit(kw.get("values", ()), kw.get("complete", True))
        return getattr(ZeroSequence, self.kind)(**kw)

    def to_dict(self) -> dict:
        out = {"kind": self.kind}
        for k, v in self.params:
            if k == "values":
                v = [_encode_complex(z) for z in v]
            elif k == "angles":
                v = list(v)
            out[k] = v
        return out


@dataclass(frozen=True)
class FunctionConfig:
    zeros: ZeroConfig
    genus: int
    constant: complex = 1.0
    multiplicity: int = 0
    truncation: int = 64
    exp_poly: tuple = ()

    KEYS = ("zeros", "genus", "constant", "multiplicity", "truncation", "exp_poly")

    @classmethod
    def parse(cls, block, where: str = "function") -> "FunctionConfig":
        _reject_unknown(block, cls.KEYS, where)
        zeros = ZeroConfig.parse(_require(block, "zeros", where), f"{where}.zeros")
        genus = _integer(_require(block, "genus", where), f"{where}.genus")
        kw = {}
        if "constant" in block:
            kw["constant"] = _complex(block["constant"], f"{where}.constant")
        for key in ("multiplicity", "truncation"):
            if key in block:
                kw[key] = _integer(block[key], f"{where}.{key}")
        if "exp_poly" in block:
            kw["exp_poly"] = _complex_list(block["exp_poly"], f"{where}.exp_poly")
        return cls(zeros, genus, **kw)

    def build(self) -> EntireFunctionSpec:
        try:
            return EntireFunctionSpec(self.zeros.build(), self.genus, self.constant, self.multiplicity,
                                      self.truncation, exp_poly=self.exp_poly)
        except (ValueError, FracCauchyError) as e:
            raise ConfigError(f"function block: {e}") from None

    def to_dict(self) -> dict:
        return {
            "zeros": self.zeros.to_dict(),
            "genus": self.genus,
            "constant": _encode_complex(self.constant),
            "multiplicity": self.multiplicity,
            "truncation": self.truncation,
            "exp_poly": [_encode_complex(c) for c in self.exp_poly],
        }


@dataclass(frozen=True)
class OperatorConfig:
    dimension: int
    eigenvalues: tuple
    lengths: tuple
    basis: str = "standard"  # standard | seeded_random | explicit
    seed: int | None = None
    nilpotent: float = 0.05
    matrix: tuple | None = None  # rows of complex entries
    sector: tuple | None = None

    KEYS = ("dimension", "eigenvalues", "lengths", "basis", "sector")

    @classmethod
    def parse(cls, block, where: str = "operator") -> "OperatorConfig":
        _reject_unknown(block, cls.KEYS, where)
        dim = _integer(_require(block, "dimension", where), f"{where}.dimension")
        eig = _complex_list(_require(block, "eigenvalues", where), f"{where}.eigenvalues")
        lens = _require(block, "lengths", where)
        if not isinstance(lens, list):
            raise ConfigError(f"'{where}.lengths' must be a list")
        lens = tuple(_integer(k, f"{where}.lengths[{i}]") for i, k in enumerate(lens))
        if len(lens) != len(eig):
            raise ConfigError(f"'{where}.lengths' needs one entry per eigenvalue")
        if sum(lens) != dim:
            raise ConfigError(f"'{where}.dimension' is {dim} but the chain lengths add up to {sum(lens)}")
        kw = {}
        basis = block.get("basis", "standard")
        if basis == "standard":
            pass
        elif isinstance(basis, dict) and "seeded_random" in basis:
            _reject_unknown(basis, ("seeded_random", "nilpotent"), f"{where}.basis")
            kw.update(basis="seeded_random", seed=_integer(basis["seeded_random"], f"{where}.basis.seeded_random"))
            if "nilpotent" in basis:
                kw["nilpotent"] = _number(basis["nilpotent"], f"{where}.basis.nilpotent")
        elif isinstance(basis, dict) and "explicit" in basis:
            _reject_unknown(basis, ("explicit",), f"{where}.basis")
            rows = basis["explicit"]
            if not isinstance(rows, list) or len(rows) != dim:
                raise ConfigError(f"'{where}.basis.explicit' must be a {dim}x{dim} matrix")
            mat = tuple(_complex_list(r, f"{where}.basis.explicit[{i}]") for i, r in enumerate(rows))
            if any(len(r) != dim for r in mat):
                raise ConfigError(f"'{where}.basis.explicit' must be a {dim}x{dim} matrix")
            kw.update(basis="explicit", matrix=mat)
        else:
            raise ConfigError(f"'{where}.basis' must be \"standard\", {{\"seeded_random\": seed}} or {{\"explicit\": rows}}")
        if block.get("sector") is not None:
            sec = block["sector"]
            if not isinstance(sec, list) or len(sec) != 2:
                raise ConfigError(f"'{where}.sector' must be [theta0, theta1]")
            kw["sector"] = (_number(sec[0], f"{where}.sector"), _number(sec[1], f"{where}.sector"))
        return cls(dim, eig, lens, **kw)

    def build(self) -> SpectralOperator:
        try:
            if self.basis == "seeded_random":
                spec = OperatorSpec.random(self.eigenvalues, self.lengths, self.seed, self.nilpotent, sector=self.sector)
            else:
                mat = None if self.matrix is None else np.array(self.matrix, dtype=complex)
                spec = OperatorSpec(self.eigenvalues, self.lengths, mat, self.sector)
            return assemble(spec)
        except (ValueError, FracCauchyError) as e:
            raise ConfigError(f"operator block: {e}") from None

    def to_dict(self) -> dict:
        if self.basis == "standard":
            basis = "standard"
        elif self.basis == "seeded_random":
            basis = {"seeded_random": self.seed, "nilpotent": self.nilpotent}
        else:
            basis = {"explicit": [[_encode_complex(z) for z in row] for row in self.matrix]}
        return {
            "dimension": self.dimension,
            "eigenvalues": [_encode_complex(z) for z in self.eigenvalues],
            "lengths": list(self.lengths),
            "basis": basis,
            "sector": None if self.sector is None else list(self.sector),
        }


@dataclass(frozen=True)
class EquationConfig:
    alpha: float
    initial: tuple
    times: tuple
    R: float | None = None
    kappa: float = 0.5

    KEYS = ("alpha", "initial", "times", "R", "kappa")

    @classmethod
    def parse(cls, block, where: str = "equation") -> "EquationConfig":
        _reject_unknown(block, cls.KEYS, where)
        alpha = _number(_require(block, "alpha", where), f"{where}.alpha")
        initial = _complex_list(_require(block, "initial", where), f"{where}.initial")
        times = _require(block, "times", where)
        if isinstance(times, dict):
            _reject_unknown(times, ("start", "stop", "count", "spacing"), f"{where}.times")
            a = _number(_require(times, "start", f"{where}.times"), f"{where}.times.start")
            b = _number(_require(times, "stop", f"{where}.times"), f"{where}.times.stop")
            n = _integer(_require(times, "count", f"{where}.times"), f"{where}.times.count")
            spacing = times.get("spacing", "linear")
            if spacing not in ("linear", "log"):
                raise ConfigError(f"'{where}.times.spacing' must be \"linear\" or \"log\"")
            if a <= 0 or n < 1:
                raise ConfigError(f"'{where}.times' needs start > 0 and count >= 1")
            grid = np.linspace(a, b, n) if spacing == "linear" else np.geomspace(a, b, n)
            times = tuple(float(x) for x in grid)
        elif isinstance(times, list):
            times = tuple(_number(x, f"{where}.times[{i}]") for i, x in enumerate(times))
        else:
            raise ConfigError(f"'{where}.times' must be a list or a {{start, stop, count}} object")
        kw = {}
        if block.get("R") is not None:
            kw["R"] = _number(block["R"], f"{where}.R")
        if "kappa" in block:
            kw["kappa"] = _number(block["kappa"], f"{where}.kappa")
        return cls(alpha, initial, times, **kw)

    def to_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "initial": [_encode_complex(z) for z in self.initial],
            "times": list(self.times),
            "R": self.R,
            "kappa": self.kappa,
        }


@dataclass(frozen=True)
class Tolerances:
    quadrature: float = 1e-10
    oracle: float = 1e-6
    residual_mode: float = 1e-8
    residual_numeric: float = 1e-4
    initial_condition: float = 1e-3
    beta_k: float = 1e-8
    regrouping: float = 1e-10

    @classmethod
    def parse(cls, block, where: str = "tolerances") -> "Tolerances":
        names = [f.name for f in fields(cls)]
        _reject_unknown(block, names, where)
        kw = {}
        for k, v in block.items():
            kw[k] = _number(v, f"{where}.{k}")
            if kw[k] <= 0:
                raise ConfigError(f"'{where}.{k}' must be positive")
        return cls(**kw)

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


@dataclass(frozen=True)
class OutputConfig:
    directory: str = "out"
    prefix: str = "run"

    @classmethod
    def parse(cls, block, where: str = "output") -> "OutputConfig":
        _reject_unknown(block, ("directory", "prefix"), where)
        kw = {}
        for k in ("directory", "prefix"):
            if k in block:
                if not isinstance(block[k], str) or not block[k]:
                    raise ConfigError(f"'{where}.{k}' must be a non-empty string")
                kw[k] = block[k]
        return cls(**kw)

    def to_dict(self) -> dict:
        return {"directory": self.directory, "prefix": self.prefix}


@dataclass(frozen=True)
class ProblemConfig:
    function: FunctionConfig | None = None
    operator: OperatorConfig | None = None
    equation: EquationConfig | None = None
    tolerances: Tolerances = field(default_factory=Tolerances)
    output: OutputConfig = field(default_factory=OutputConfig)

    @classmethod
    def parse(cls, data) -> "ProblemConfig":
        _reject_unknown(data, ("schema_version", "function", "operator", "equation", "tolerances", "output"), "")
        version = _require(data, "schema_version", "config")
        if version != SCHEMA_VERSION:
            raise ConfigError(f"'schema_version' must be {SCHEMA_VERSION}, got {version!r}")
        kw = {}
        if "function" in data:
            kw["function"] = FunctionConfig.parse(data["function"])
        if "operator" in data:
            kw["operator"] = OperatorConfig.parse(data["operator"])
        if "equation" in data:
            kw["equation"] = EquationConfig.parse(data["equation"])
        if "tolerances" in data:
            kw["tolerances"] = Tolerances.parse(data["tolerances"])
        if "output" in data:
            kw["output"] = OutputConfig.parse(data["output"])
        return cls(**kw)

    def to_dict(self) -> dict:
        out = {"schema_version": SCHEMA_VERSION}
        for name in ("function", "operator", "equation"):
            block = getattr(self, name)
            if block is not None:
                out[name] = block.to_dict()
        out["tolerances"] = self.tolerances.to_dict()
        out["output"] = self.output.to_dict()
        return out

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def need(self, *blocks: str) -> None:
        for b in blocks:
            if getattr(self, b) is None:
                raise ConfigError(f"missing required key '{b}'")

    def build_problem(self) -> CauchyProblem:
        self.need("function", "operator", "equation")
        phi = self.function.build()
        op = self.operator.build()
        eq = self.equation
        try:
            return CauchyProblem(op, phi, eq.alpha, np.array(eq.initial), np.array(eq.times), eq.R, eq.kappa,
                                 self.tolerances.quadrature)
        except ValueError as e:
            raise ConfigError(f"equation block: {e}") from None


def load_config(path) -> ProblemConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e.strerror}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"config {path} is not valid JSON: {e}") from None
    return ProblemConfig.parse(data)
