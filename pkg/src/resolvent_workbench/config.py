"""Suite configuration (JSON, ``schema: 1``)."""

from __future__ import annotations

import json
from pathlib import Path
from typing import Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from .fock import RepConfig
from .space_model import SpaceModel, TestFunction, build_canonical_pairs, build_lightray_hermite

CHECK_IDS = (
    "resolvent_battery",
    "calibration",
    "norm_law",
    "asymptotics",
    "generator",
    "susy_core",
    "susy_identity",
    "state_conditions",
    "density_net",
    "fd_order",
)
CheckId = Literal[
    "resolvent_battery",
    "calibration",
    "norm_law",
    "asymptotics",
    "generator",
    "susy_core",
    "susy_identity",
    "state_conditions",
    "density_net",
    "fd_order",
]


class ConfigError(ValueError):
    """Invalid suite configuration; the message names the offending field."""


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class ModelSpec(_Strict):
    flavor: Literal["canonical_pairs", "lightray_hermite", "custom"]
    N: Optional[int] = Field(default=None, ge=2)
    n_pairs: Optional[int] = Field(default=None, ge=1)
    tau: Optional[list[list[float]]] = None
    S: Optional[list[list[float]]] = None

    @model_validator(mode="after")
    def _consistent(self):
        if self.flavor == "canonical_pairs":
            if self.n_pairs is None and self.N is None:
                self.n_pairs = 1
            if self.n_pairs is None:
                if self.N % 2:
                    raise ValueError("N must be even")
                self.n_pairs = self.N // 2
        elif self.N is None:
            raise ValueError(f"N is required for flavor {self.flavor!r}")
        if self.flavor == "custom" and (self.tau is None or self.S is None):
            raise ValueError("custom models need tau and S")
        return self

    def build(self) -> SpaceModel:
        if self.flavor == "canonical_pairs":
            return build_canonical_pairs(self.n_pairs)
        if self.flavor == "lightray_hermite":
            return build_lightray_hermite(self.N)
        return SpaceModel.from_dict(self.model_dump(exclude_none=True))


class RepSpec(_Strict):
    boson_cutoff: int = Field(default=16, ge=4)
    safe_margin: int = Field(default=4, gt=0)
    solver_tolerance: float = Field(default=1e-10, gt=0)
    dimension_budget: int = Field(default=50_000, gt=0)
    sigma_tolerance: float = Field(default=1e-6, gt=0)

    @model_validator(mode="after")
    def _margin(self):
        if not self.safe_margin < self.boson_cutoff / 2:
            raise ValueError("safe_margin must be below boson_cutoff / 2")
        return self

    def build(self) -> RepConfig:
        return RepConfig(**self.model_dump())


class CheckSpec(_Strict):
    """One requested check with optional overrides."""

    id: CheckId
    functions: Optional[list[str]] = None
    lambdas: Optional[list[float]] = None
    expr: Optional[Union[str, list[str]]] = None
    h: Optional[float] = Field(default=None, gt=0)
    order: Optional[Literal["central2", "richardson4"]] = None
    tolerance: Optional[float] = Field(default=None, gt=0)
    vectors: Optional[int] = Field(default=None, ge=1)
    words: Optional[int] = Field(default=None, ge=0)

    @field_validator("lambdas")
    @classmethod
    def _nonzero(cls, v):
        if v is not None and any(x == 0 for x in v):
            raise ValueError("lambda values must be nonzero")
        return v

    def exprs(self) -> list[str]:
        if self.expr is None:
            return []
        return [self.expr] if isinstance(self.expr, str) else list(self.expr)


class SuiteConfig(_Strict):
    schema_: Literal[1] = Field(default=1, alias="schema")
    seed: int = Field(default=0, ge=0, lt=2**64)
    model: ModelSpec
    rep: RepSpec = RepSpec()
    functions: dict[str, list[float]] = {}
    checks: list[CheckSpec] = []
    output: Optional[str] = None

    model_config = ConfigDict(extra="forbid", populate_by_name=True)

    @model_validator(mode="after")
    def _names(self):
        for i, c in enumerate(self.checks):
            for name in c.functions or []:
                if name not in self.functions:
                    raise ValueError(f"checks[{i}].functions references undefined name {name!r}")
        return self

    def build_model(self) -> SpaceModel:
        try:
            return self.model.build()
        except ValueError as exc:
            raise ConfigError(f"model: {exc}") from exc

    def bind_functions(self, model: SpaceModel) -> dict[str, TestFunction]:
        out = {}
        for name, coeffs in self.functions.items():
            if len(coeffs) != model.N:
                raise ConfigError(f"functions.{name}: expected {model.N} coefficients, got {len(coeffs)}")
            out[name] = model.vector(coeffs)
        return out


def _field_path(loc: tuple) -> str:
    parts = []
    for p in loc:
        if isinstance(p, int):
            parts[-1:] = [f"{parts[-1]}[{p}]"] if parts else [f"[{p}]"]
        else:
            parts.append(str(p))
    return ".".join(parts)


def load_config(data: Union[dict, str, Path]) -> SuiteConfig:
    """Validate a config mapping, JSON text or file path.

    Raises :class:`ConfigError` whose message starts with the dotted field path.
    """
    if isinstance(data, Path) or (isinstance(data, str) and not data.lstrip().startswith("{")):
        try:
            data = json.loads(Path(data).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"config: {exc}") from exc
    elif isinstance(data, str):
        try:
            data = json.loads(data)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config: {exc}") from exc
    try:
        return SuiteConfig.model_validate(data)
    except ValidationError as exc:
        err = exc.errors()[0]
        msg = err["msg"].removeprefix("Value error, ")
        path = _field_path(tuple(x for x in err["loc"] if x not in ("schema_",)))
        if err["loc"] and err["loc"][-1] == "schema_":
            path = "schema"
        # top-level validators already lead with the offending field
        raise ConfigError(f"{path}: {msg}" if path else msg) from exc
