"""Request and response models shared by the HTTP service and the CLI.

Numbers may be given as JSON numbers or decimal strings ("1e-3").
"""

from __future__ import annotations

from typing import Any, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

MapSpec = Union[str, dict]


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class CensusOptions(_Strict):
    region: tuple[float, float] = (-0.05, 0.05)
    seed_density: Optional[int] = Field(default=None, ge=1)
    y_levels: int = Field(default=5, ge=1)
    windings: Optional[list[int]] = None
    tol_h: float = Field(default=1e-9, gt=0)
    tol_e: float = Field(default=1e-9, gt=0)


class ForgeRequest(_Strict):
    """Forge 2*gamma period-N orbits on the y = 0 circle of ``map``.

    ``map = "integrable_twist"`` means (x, y) -> (x + p/N + slope*y, y).
    Give either ``t`` or a budget ``eps`` (t is then the largest admissible).
    """

    map: MapSpec = "integrable_twist"
    slope: float = Field(default=1.0, gt=0)
    p: int
    N: int = Field(ge=1)
    gamma: int = Field(ge=1)
    t: Optional[float] = Field(default=None, ge=0)
    eps: Optional[float] = Field(default=None, gt=0)
    census: CensusOptions = CensusOptions()
    seed: int = Field(default=0, ge=0, lt=1 << 64)

    @model_validator(mode="after")
    def _t_or_eps(self):
        if (self.t is None) == (self.eps is None):
            raise ValueError("give exactly one of t and eps")
        return self


class CensusRequest(_Strict):
    map: MapSpec
    n: int = Field(ge=1)
    region: tuple[float, float] = (-0.05, 0.05)
    seed_density: int = Field(default=64, ge=1)
    y_levels: int = Field(default=5, ge=1)
    windings: Optional[list[int]] = None
    hints: Optional[list[tuple[float, float]]] = None
    tol_h: float = Field(default=1e-9, gt=0)
    tol_e: float = Field(default=1e-9, gt=0)
    seed: int = Field(default=0, ge=0, lt=1 << 64)


class KamRequest(_Strict):
    """Invariant circle of rotation ``theta`` for ``map`` composed with an
    optional vertical shear y -> y + shear_amplitude * sin(2 pi x)."""

    map: MapSpec = "standard"
    theta: Union[float, Literal["golden"]] = "golden"
    shear_amplitude: float = 0.0
    guess: Optional[float] = None
    search: tuple[float, float] = (-0.24, 0.24)
    modes: int = Field(default=64, ge=8)
    max_modes: int = Field(default=1024, ge=8)
    tol: float = Field(default=1e-10, gt=0)
    seed: int = Field(default=0, ge=0, lt=1 << 64)


class PlateauJob(_Strict):
    k: int = Field(ge=1)
    gamma: int = Field(ge=1)
    eps: float = Field(ge=0)


class IntervalRequest(_Strict):
    delta: float = 0.2
    kmax: int = Field(default=6, ge=1)
    plateaus: list[PlateauJob] = Field(
        default_factory=lambda: [PlateauJob(k=k, gamma=2 ** (k + 1), eps=1e-4) for k in range(1, 5)])
    max_laps: int = Field(default=1 << 16, ge=1)
    seed: int = Field(default=0, ge=0, lt=1 << 64)

    @field_validator("delta")
    @classmethod
    def _delta(cls, v):
        if not (0 < v < 0.25):
            raise ValueError("delta must lie in (0, 1/4)")
        return v


class CertifyRequest(_Strict):
    theta: Union[float, Literal["golden"]] = "golden"
    tau: float = Field(default=0.0, ge=0)
    qmax: int = Field(default=10_000, ge=2)
    scan: bool = True
    seed: int = Field(default=0, ge=0, lt=1 << 64)


class CascadeRequest(BaseModel):
    """Campaign config; validated in depth by :func:`pergrowth.campaign.load_config`."""

    model_config = ConfigDict(extra="allow")


class JobResult(BaseModel):
    kind: str
    summary: dict[str, Any]
    files: dict[str, str] = {}


class ErrorBody(BaseModel):
    type: str
    message: str
    exit_code: int
    details: dict[str, Any] = {}


class ErrorReport(BaseModel):
    error: ErrorBody
