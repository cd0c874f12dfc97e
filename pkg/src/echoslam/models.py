"""Pydantic request/response models for the service and CLI client."""

from __future__ import annotations

import math
from typing import Literal, Optional

from pydantic import BaseModel, Field, model_validator


class WallModel(BaseModel):
    normal_angle_deg: float
    offset_m: float


class RoomModel(BaseModel):
    """Room as walls (angle/offset) or as a convex vertex loop."""

    walls: Optional[list[WallModel]] = None
    vertices: Optional[list[tuple[float, float]]] = None

    @model_validator(mode="after")
    def _one_of(self):
        if bool(self.walls) == bool(self.vertices):
            raise ValueError("provide exactly one of 'walls' or 'vertices'")
        return self


class PathSpec(BaseModel):
    """Measurement trajectory: start point, heading and the two steps."""

    o1: tuple[float, float]
    heading_deg: float = 0.0
    d12: float = Field(gt=0)
    d23: float = Field(gt=0)
    phi_rad: float


class NoiseModel(BaseModel):
    sigma_m: float = Field(default=0.0, ge=0)
    n_spurious: int = Field(default=0, ge=0)
    snr_db: Optional[float] = None
    common_spurious_m: list[float] = Field(default_factory=list)


class AcousticsModel(BaseModel):
    f0_hz: float = 30.0
    f1_hz: float = 8000.0
    chirp_duration_s: float = 0.05
    sample_rate_hz: float = 96000.0
    c_mps: float = 346.0
    tau0_s: float = 1e-3
    max_order: int = Field(default=1, ge=1)
    d_max_m: float = 8.0
    reflection_gain: float = 0.9
    los_gain: float = 2.0


class PeakConfigModel(BaseModel):
    d_min_m: float = 0.6
    d_max_m: float = 6.5
    min_separation_m: float = 0.5
    prominence_ratio: float = 0.3
    max_peaks: int = 10
    min_magnitude_ratio: float = 0.02
    taper_to_ratio: Optional[float] = None


class ScenarioSpec(BaseModel):
    """Full synthetic-scene description for simulation and pipeline runs."""

    room: RoomModel
    points: Optional[list[tuple[float, float]]] = None
    path: Optional[PathSpec] = None
    noise: NoiseModel = Field(default_factory=NoiseModel)
    acoustics: AcousticsModel = Field(default_factory=AcousticsModel)
    peaks: PeakConfigModel = Field(default_factory=PeakConfigModel)
    seed: Optional[int] = None

    @model_validator(mode="after")
    def _check(self):
        if (self.points is None) == (self.path is None):
            raise ValueError("provide exactly one of 'points' or 'path'")
        if self.points is not None and len(self.points) != 3:
            raise ValueError("need exactly 3 measurement points")
        stochastic = (
            self.noise.sigma_m > 0
            or self.noise.n_spurious > 0
            or (self.noise.snr_db is not None and math.isfinite(self.noise.snr_db))
        )
        if stochastic and self.seed is None:
            raise ValueError("seed is required for any stochastic step")
        return self


class SlamConfigModel(BaseModel):
    eps: float = 0.05
    v_th: float = 1e-3
    k_min: int = 3
    k_max: int = 6
    angular_tol: float = 0.02
    exhaustive_signs: bool = False
    budget: Optional[int] = None
    angle_constraint: Optional[tuple[float, float]] = None
    allow_reflection: bool = False
    jobs: int = 1


class EchoSetModel(BaseModel):
    point_id: str
    distances: list[float]
    labels: Optional[list[list[int]]] = None


class SolutionModel(BaseModel):
    k: int
    phi_rad: float
    var_phi: float
    walls: list[WallModel]
    vertices: list[tuple[float, float]]
    o2: tuple[float, float]
    o3: tuple[float, float]
    assignment: Optional[dict[str, list[int]]] = None
    signs: Optional[list[str]] = None
    diagnostics: dict = Field(default_factory=dict)


class GroundTruthModel(BaseModel):
    """Reference solution of a simulated scenario, in the O1 frame."""

    solution: SolutionModel
    d12: float
    d23: float
    first_order: list[EchoSetModel]


class SimulateRequest(BaseModel):
    scenario: ScenarioSpec
    include_waveforms: bool = False
    dedup: bool = False


class WaveformModel(BaseModel):
    point_id: str
    sample_rate_hz: float
    n_samples: int
    samples_b64: str  # little-endian float32


class SimulateResponse(BaseModel):
    echoes: list[EchoSetModel]
    ground_truth: GroundTruthModel
    waveforms: Optional[list[WaveformModel]] = None


class ReconstructRequest(BaseModel):
    d12: float = Field(gt=0)
    d23: float = Field(gt=0)
    echoes: Optional[list[EchoSetModel]] = None
    waveforms: Optional[list[WaveformModel]] = None
    acoustics: AcousticsModel = Field(default_factory=AcousticsModel)
    peaks: PeakConfigModel = Field(default_factory=PeakConfigModel)
    config: SlamConfigModel = Field(default_factory=SlamConfigModel)

    @model_validator(mode="after")
    def _one_input(self):
        if (self.echoes is None) == (self.waveforms is None):
            raise ValueError("provide exactly one of 'echoes' or 'waveforms'")
        n = len(self.echoes or self.waveforms or [])
        if n != 3:
            raise ValueError("need exactly 3 measurement points")
        return self


class ReconstructResponse(BaseModel):
    status: Literal["ok", "no_solution", "budget_exceeded"]
    solution: Optional[SolutionModel] = None
    detail: Optional[str] = None
    counts: Optional[dict[int, int]] = None
    detected: Optional[list[EchoSetModel]] = None


class PipelineRequest(BaseModel):
    scenario: ScenarioSpec
    config: SlamConfigModel = Field(default_factory=SlamConfigModel)
    use_waveforms: bool = False
    include_timing: bool = False


class PipelineReport(BaseModel):
    status: Literal["ok", "no_solution", "budget_exceeded"]
    k_true: int
    k_recovered: Optional[int] = None
    wall_angle_errors_deg: Optional[list[float]] = None
    vertex_hausdorff_m: Optional[float] = None
    phi_error_rad: Optional[float] = None
    o3_error_m: Optional[float] = None
    var_phi: Optional[float] = None
    combinations_examined: Optional[int] = None
    solution: Optional[SolutionModel] = None
    timing_s: Optional[float] = None


class AmbiguityRequest(BaseModel):
    seed: int = 0


class CountRequest(BaseModel):
    n1: int = Field(ge=1)
    n2: int = Field(ge=1)
    n3: int = Field(ge=1)
    k: int = Field(ge=1)


class CountResponse(BaseModel):
    count: int
