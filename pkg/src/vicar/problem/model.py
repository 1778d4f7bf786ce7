"""Problem-file models: the system, its sampling box and optional candidate data."""

from __future__ import annotations

from typing import Annotated, Literal

from pydantic import BaseModel, BeforeValidator, ConfigDict, Field, model_validator


def _as_text(value):
    # YAML reads bare numbers such as `0` as int; the parser decides what is valid
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return str(value)
    return value


Expression = Annotated[str, BeforeValidator(_as_text)]


class EigenBlock(BaseModel):
    """User-supplied eigendata: eigenvalues and eigenvector rows ``X_a = (X_a^1, ..., X_a^n)``."""
    model_config = ConfigDict(populate_by_name=True)

    eigenvalues: list[Expression] | None = Field(default=None, alias="lambda")
    vectors: list[list[Expression]] | None = None
    normalize: Literal["none", "unit-first-component"] = "none"
    diagonalizable: bool = True

    @model_validator(mode="after")
    def validate_pairing(self):
        if (self.eigenvalues is None) != (self.vectors is None):
            raise ValueError("'lambda' and 'vectors' must be given together")
        if self.vectors is not None and len(self.vectors) != len(self.eigenvalues):
            raise ValueError(
                f"{len(self.eigenvalues)} eigenvalues but {len(self.vectors)} eigenvectors"
            )
        return self


class PfaffianBlock(BaseModel):
    """Candidate solution of the Pfaffian system; ``r_alpha`` is keyed by eigen label."""
    r1_tilde: Expression | None = None
    r_alpha: dict[int, Expression] = {}


class CartanBlock(BaseModel):
    """Cartan 2-form candidate ``r_ab phi^{aV} ^ phi^{bH}`` (a vector means a diagonal r)."""
    r: list[Expression] | list[list[Expression]] | None = None
    pfaffian: PfaffianBlock | None = None

    @property
    def is_diagonal(self) -> bool:
        return self.r is not None and all(isinstance(entry, str) for entry in self.r)


class ProblemFile(BaseModel):
    """Top-level problem definition parsed from a ``.vicar`` YAML file."""
    name: str
    n: int = Field(ge=1)
    time: str = "t"
    coordinates: list[str]
    velocities: list[str]
    parameters: dict[str, Expression] = {}
    equations: list[Expression]
    box: dict[str, tuple[float, float]] = {}
    guards: list[Expression] = []
    seed: int = 0
    samples: int = Field(default=16, ge=4)
    eigen: EigenBlock | None = None
    multiplier: list[list[Expression]] | None = None
    cartan: CartanBlock | None = None

    @model_validator(mode="after")
    def validate_shapes(self):
        n = self.n
        for field_name in ("coordinates", "velocities", "equations"):
            size = len(getattr(self, field_name))
            if size != n:
                raise ValueError(f"'{field_name}' has {size} entries but n = {n}")

        declared = {self.time, *self.coordinates, *self.velocities, *self.parameters}
        for name, (lower, upper) in self.box.items():
            if name not in declared:
                raise ValueError(f"Box entry '{name}' is not a declared symbol")
            if lower >= upper:
                raise ValueError(f"Box entry '{name}' needs lower < upper, got [{lower}, {upper}]")
        for name in self.parameters:
            if name in self.box:
                raise ValueError(f"Parameter '{name}' has a fixed value and cannot have a box")

        if self.eigen is not None and self.eigen.vectors is not None:
            if len(self.eigen.vectors) != n or any(len(v) != n for v in self.eigen.vectors):
                raise ValueError(f"'eigen' needs {n} eigenvectors of length {n}")

        if self.multiplier is not None:
            if len(self.multiplier) != n or any(len(row) != n for row in self.multiplier):
                raise ValueError(f"'multiplier' must be a {n}x{n} matrix")

        if self.cartan is not None and self.cartan.r is not None:
            r = self.cartan.r
            if len(r) != n:
                raise ValueError(f"'cartan.r' must have {n} entries")
            if not self.cartan.is_diagonal and any(len(row) != n for row in r):
                raise ValueError(f"'cartan.r' must be a vector or a {n}x{n} matrix")
        if self.cartan is not None and self.cartan.pfaffian is not None:
            bad = [label for label in self.cartan.pfaffian.r_alpha if not 1 <= label <= n]
            if bad:
                raise ValueError(f"'cartan.pfaffian.r_alpha' labels out of range 1..{n}: {bad}")
        return self

    @property
    def has_candidate(self) -> bool:
        return self.multiplier is not None or (self.cartan is not None and self.cartan.r is not None)
