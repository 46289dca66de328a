"""Run configuration: dataclasses plus a YAML reader and writer.

Every number may be written as a decimal string (``"0.001"``) or a rational
(``"1/3"``); plain YAML floats are kept as their source text, so no value
passes through binary floating point before it reaches the solvers.
"""
from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import yaml

from .errors import ConfigError
from .orthoexp import MeasureSpec, fraction_str, to_fraction

SCHEMA_VERSION = 1
DEFAULT_PRECISION = 512
SUITES = ("rate", "zeros", "szego", "all")


class _Loader(yaml.SafeLoader):
    """Safe loader that keeps floats as their literal text."""


_Loader.add_constructor("tag:yaml.org,2002:float",
                        lambda loader, node: loader.construct_scalar(node))


class _Dumper(yaml.SafeDumper):
    pass


def _complex_str(z: complex) -> str:
    return repr(complex(z)).strip("()")


def _parse_complex(value, where: str) -> complex:
    if isinstance(value, (int, float, complex)):
        return complex(value)
    if isinstance(value, str):
        try:
            return complex(value.replace(" ", "").replace("i", "j"))
        except ValueError:
            pass
    if isinstance(value, (list, tuple)) and len(value) == 2:
        return complex(float(to_fraction(value[0])), float(to_fraction(value[1])))
    raise ConfigError(f"{where}: cannot read {value!r} as a complex number")


def _fraction(value, where: str) -> Fraction:
    try:
        return to_fraction(value)
    except (ConfigError, ValueError, TypeError, ZeroDivisionError) as exc:
        raise ConfigError(f"{where}: {exc}") from None


def _int(value, where: str, minimum: int = 0) -> int:
    if isinstance(value, bool) or not isinstance(value, (int, str)):
        raise ConfigError(f"{where}: expected an integer, got {value!r}")
    try:
        out = int(value)
    except ValueError:
        raise ConfigError(f"{where}: expected an integer, got {value!r}") from None
    if out < minimum:
        raise ConfigError(f"{where}: must be at least {minimum}, got {out}")
    return out


def _check_keys(block: dict, allowed, where: str):
    if not isinstance(block, dict):
        raise ConfigError(f"{where}: expected a mapping, got {type(block).__name__}")
    extra = sorted(set(block) - set(allowed))
    if extra:
        raise ConfigError(f"{where}: unknown field(s) {', '.join(map(str, extra))}")


# ---------------------------------------------------------------- blocks

@dataclass(frozen=True)
class TargetConfig:
    """Function being approximated: ``markov`` (``sigma_hat``) or a simple pole."""

    kind: str = "markov"
    pole: Fraction | None = None

    def __post_init__(self):
        if self.kind not in ("markov", "pole"):
            raise ConfigError(f"target.kind: expected 'markov' or 'pole', got {self.kind!r}")
        if self.kind == "pole" and self.pole is None:
            raise ConfigError("target.pole: required when kind is 'pole'")

    def to_dict(self):
        out = {"kind": self.kind}
        if self.pole is not None:
            out["pole"] = fraction_str(self.pole)
        return out

    @classmethod
    def from_dict(cls, obj, where="target"):
        if isinstance(obj, str):
            obj = {"kind": obj}
        _check_keys(obj, ("kind", "pole"), where)
        pole = obj.get("pole")
        return cls(obj.get("kind", "markov"),
                   None if pole is None else _fraction(pole, f"{where}.pole"))


@dataclass(frozen=True)
class RayConfig:
    """Indices ``n`` along the ray with ``m = round(n (1 - c) / c)``."""

    ns: tuple
    test_points: tuple = ()
    expected: tuple = ()

    def to_dict(self):
        out = {"ns": list(self.ns), "test_points": [_complex_str(p) for p in self.test_points]}
        if self.expected:
            out["expected"] = [e for e in self.expected]
        return out

    @classmethod
    def from_dict(cls, obj, where="ray"):
        _check_keys(obj, ("ns", "test_points", "expected"), where)
        ns = obj.get("ns")
        if not isinstance(ns, list) or not ns:
            raise ConfigError(f"{where}.ns: expected a non-empty list of integers")
        ns = tuple(_int(v, f"{where}.ns[{k}]", 1) for k, v in enumerate(ns))
        pts = tuple(_parse_complex(p, f"{where}.test_points[{k}]")
                    for k, p in enumerate(obj.get("test_points", [])))
        exp = tuple(obj.get("expected", []))
        if exp and len(exp) != len(pts):
            raise ConfigError(f"{where}.expected: needs one label per test point")
        return cls(ns, pts, exp)


@dataclass(frozen=True)
class GridConfig:
    """Rectangular raster for the domain classifier."""

    re: tuple = (Fraction(-2), Fraction(4), 61)
    im: tuple = (Fraction(-2), Fraction(2), 41)

    def to_dict(self):
        return {"re": [fraction_str(self.re[0]), fraction_str(self.re[1]), self.re[2]],
                "im": [fraction_str(self.im[0]), fraction_str(self.im[1]), self.im[2]]}

    @classmethod
    def from_dict(cls, obj, where="grid"):
        _check_keys(obj, ("re", "im"), where)
        out = {}
        for key in ("re", "im"):
            v = obj.get(key, getattr(cls, key))
            if not isinstance(v, (list, tuple)) or len(v) != 3:
                raise ConfigError(f"{where}.{key}: expected [lo, hi, count]")
            lo, hi = _fraction(v[0], f"{where}.{key}[0]"), _fraction(v[1], f"{where}.{key}[1]")
            if not lo < hi:
                raise ConfigError(f"{where}.{key}: lo must be below hi")
            out[key] = (lo, hi, _int(v[2], f"{where}.{key}[2]", 2))
        return cls(**out)


@dataclass(frozen=True)
class TrajectoryConfig:
    step: Fraction = Fraction(1, 100)
    max_points: int = 5000

    def to_dict(self):
        return {"step": fraction_str(self.step), "max_points": self.max_points}

    @classmethod
    def from_dict(cls, obj, where="trajectory"):
        _check_keys(obj, ("step", "max_points"), where)
        step = _fraction(obj.get("step", cls.step), f"{where}.step")
        if step <= 0:
            raise ConfigError(f"{where}.step: must be positive")
        return cls(step, _int(obj.get("max_points", cls.max_points), f"{where}.max_points", 10))


# ---------------------------------------------------------------- run config

_TOP_KEYS = ("schema", "mu", "sigma", "precision_bits", "c", "index", "target", "ray", "grid",
             "trajectory", "suite", "workers", "output_dir")


@dataclass(frozen=True)
class RunConfig:
    """Everything a command needs, in exact arithmetic where it matters.

    Attributes
    ----------
    mu, sigma : MeasureSpec
        Interval supports must not overlap; sharing one endpoint is allowed
        (the degenerate curve case).
    precision_bits : int
    c : Fraction or None
        Ray parameter in ``(0, 1/2]`` for ``curve``, ``domains``,
        ``trajectory`` and ``verify``.
    index : tuple or None
        ``(m, n)`` for ``approximate`` and ``zeros``.
    target, ray, grid, trajectory
        Command-specific blocks.
    suite : str
        Default suite for ``verify``.
    output_dir : str
    """

    mu: MeasureSpec
    sigma: MeasureSpec
    precision_bits: int = DEFAULT_PRECISION
    c: Fraction | None = None
    index: tuple | None = None
    target: TargetConfig = field(default_factory=TargetConfig)
    ray: RayConfig | None = None
    grid: GridConfig = field(default_factory=GridConfig)
    trajectory: TrajectoryConfig = field(default_factory=TrajectoryConfig)
    suite: str = "all"
    workers: int = 1
    output_dir: str = "runs"

    def __post_init__(self):
        if self.precision_bits < 53:
            raise ConfigError(f"precision_bits: must be at least 53, got {self.precision_bits}")
        if not (self.mu.b <= self.sigma.a or self.sigma.b <= self.mu.a):
            raise ConfigError(f"sigma: interval [{self.sigma.a}, {self.sigma.b}] overlaps "
                              f"mu on [{self.mu.a}, {self.mu.b}]")
        if self.c is not None and not (0 < self.c <= Fraction(1, 2)):
            raise ConfigError(f"c: must lie in (0, 1/2], got {self.c}")
        if self.index is not None:
            m, n = self.index
            if not (0 <= n - 1 <= m):
                raise ConfigError(f"index: need n - 1 <= m and n >= 1, got (m, n) = ({m}, {n})")
        if self.suite not in SUITES:
            raise ConfigError(f"suite: expected one of {', '.join(SUITES)}, got {self.suite!r}")
        if self.workers < 1:
            raise ConfigError("workers: must be at least 1")

    # ------------------------------------------------------------ (de)serialization
    def to_dict(self) -> dict:
        out = {"schema": SCHEMA_VERSION,
               "mu": self.mu.to_config(), "sigma": self.sigma.to_config(),
               "precision_bits": self.precision_bits}
        if self.c is not None:
            out["c"] = fraction_str(self.c)
        if self.index is not None:
            out["index"] = {"m": self.index[0], "n": self.index[1]}
        out["target"] = self.target.to_dict()
        if self.ray is not None:
            out["ray"] = self.ray.to_dict()
        out["grid"] = self.grid.to_dict()
        out["trajectory"] = self.trajectory.to_dict()
        out["suite"] = self.suite
        out["workers"] = self.workers
        out["output_dir"] = self.output_dir
        return out

    def dumps(self) -> str:
        return yaml.dump(self.to_dict(), Dumper=_Dumper, sort_keys=False, default_flow_style=None)

    def digest(self, command: str) -> str:
        """Hash of the command and the result-determining fields."""
        d = self.to_dict()
        for key in ("output_dir", "workers"):
            d.pop(key)
        text = command + "\n" + yaml.dump(d, Dumper=_Dumper, sort_keys=True)
        return hashlib.sha256(text.encode()).hexdigest()[:16]

    def replace(self, **changes) -> "RunConfig":
        d = dict(self.__dict__)
        d.update(changes)
        return RunConfig(**d)

    @classmethod
    def from_dict(cls, obj: dict) -> "RunConfig":
        _check_keys(obj, _TOP_KEYS, "config")
        schema = obj.get("schema", SCHEMA_VERSION)
        if schema != SCHEMA_VERSION:
            raise ConfigError(f"schema: unsupported version {schema!r}")
        for key in ("mu", "sigma"):
            if key not in obj:
                raise ConfigError(f"{key}: missing measure block")
        try:
            mu = MeasureSpec.from_config(obj["mu"])
        except ConfigError as exc:
            raise ConfigError(f"mu: {exc}") from None
        try:
            sigma = MeasureSpec.from_config(obj["sigma"])
        except ConfigError as exc:
            raise ConfigError(f"sigma: {exc}") from None
        kw = {"mu": mu, "sigma": sigma}
        if "precision_bits" in obj:
            kw["precision_bits"] = _int(obj["precision_bits"], "precision_bits", 1)
        if obj.get("c") is not None:
            kw["c"] = _fraction(obj["c"], "c")
        if obj.get("index") is not None:
            idx = obj["index"]
            _check_keys(idx, ("m", "n"), "index")
            kw["index"] = (_int(idx.get("m"), "index.m"), _int(idx.get("n"), "index.n"))
        if "target" in obj:
            kw["target"] = TargetConfig.from_dict(obj["target"])
        if obj.get("ray") is not None:
            kw["ray"] = RayConfig.from_dict(obj["ray"])
        if "grid" in obj:
            kw["grid"] = GridConfig.from_dict(obj["grid"])
        if "trajectory" in obj:
            kw["trajectory"] = TrajectoryConfig.from_dict(obj["trajectory"])
        if "suite" in obj:
            kw["suite"] = str(obj["suite"])
        if "workers" in obj:
            kw["workers"] = _int(obj["workers"], "workers", 1)
        if "output_dir" in obj:
            kw["output_dir"] = str(obj["output_dir"])
        return cls(**kw)

    @classmethod
    def loads(cls, text: str, source: str = "<config>") -> "RunConfig":
        """Parse YAML text; errors carry ``source:line: field: message``."""
        try:
            node = yaml.compose(text, Loader=_Loader)
            obj = yaml.load(text, Loader=_Loader)
        except yaml.YAMLError as exc:
            mark = getattr(exc, "problem_mark", None)
            line = mark.line + 1 if mark is not None else "?"
            raise ConfigError(f"{source}:{line}: malformed YAML: {getattr(exc, 'problem', exc)}") from None
        if not isinstance(obj, dict):
            raise ConfigError(f"{source}:1: top level must be a mapping")
        try:
            return cls.from_dict(obj)
        except ConfigError as exc:
            field_path = str(exc).split(":", 1)[0]
            raise ConfigError(f"{source}:{_line_of(node, field_path)}: {exc}") from None

    @classmethod
    def load(cls, path) -> "RunConfig":
        path = Path(path)
        try:
            text = path.read_text()
        except OSError as exc:
            raise ConfigError(f"{path}: cannot read config: {exc.strerror}") from None
        return cls.loads(text, str(path))


def _line_of(node, field_path: str) -> int:
    """Line number (1-based) of the deepest mapping key along ``field_path``."""
    line = 1
    parts = field_path.replace("[", ".").replace("]", "").split(".")
    for part in parts:
        if isinstance(node, yaml.MappingNode):
            for k, v in node.value:
                if k.value == part:
                    line, node = k.start_mark.line + 1, v
                    break
            else:
                return line
        elif isinstance(node, yaml.SequenceNode) and part.isdigit() and int(part) < len(node.value):
            node = node.value[int(part)]
            line = node.start_mark.line + 1
        else:
            return line
    return line
