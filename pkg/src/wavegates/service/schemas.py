"""Pydantic request and response models for the HTTP service.

The scenario config is typed here for API documentation and first-pass
validation; the core loader revalidates everything, so the two layers
can never disagree about what runs.
"""

from __future__ import annotations

from typing import Any, Literal, Union

from pydantic import BaseModel, Field


class ThresholdModel(BaseModel, extra="forbid"):
    r_min: int = 40
    g_min: int = 19
    b_min: int = 19


class ChannelShape(BaseModel, extra="forbid"):
    type: Literal["channel"]
    start: tuple[float, float]
    end: tuple[float, float]
    width: float


class DiscShape(BaseModel, extra="forbid"):
    type: Literal["disc"]
    center: tuple[float, float]
    radius: float


class JunctionShape(BaseModel, extra="forbid"):
    type: Literal["junction"]
    center: tuple[float, float]
    arm_length: float
    arm_width: float
    angles: list[float]


Shape = Union[ChannelShape, DiscShape, JunctionShape]


class GeometryModel(BaseModel, extra="forbid"):
    width: int
    height: int
    shapes: list[Shape] = Field(default_factory=list)


class GridModel(BaseModel, extra="forbid"):
    image: str | None = None
    threshold: ThresholdModel | None = None
    geometry: GeometryModel | None = None


class ParamsModel(BaseModel, extra="forbid"):
    dt: float | None = None
    dx: float | None = None
    d_u: float | None = None
    a: float | None = None
    b: float | None = None
    c1: float | None = None
    c2: float | None = None
    u_active: float | None = None
    u_display: float | None = None


class ElectrodeModel(BaseModel, extra="forbid"):
    label: str
    x: int
    y: int


class ElectrodeGridModel(BaseModel, extra="forbid"):
    x0: float
    y0: float
    dx: float
    dy: float
    nx: int
    ny: int
    prefix: str = "E"
    start: int = 1


class StimulusModel(BaseModel, extra="forbid"):
    mode: Literal["impulse", "current"] = "impulse"
    radius: float = 5.0
    amplitude: float = 1.0
    duration: int = 0


class CadenceModel(BaseModel, extra="forbid"):
    potential: int = 1
    activity: int = 1
    frequency: int = 1
    frames: int = 150


class SpikingModel(BaseModel, extra="forbid"):
    threshold: float = 0.05
    min_separation: int = 300
    window: int = 200
    segmentation_gap: int = 1000


class FrequencyModel(BaseModel, extra="forbid"):
    domain_threshold: float = 0.72


class ActivityModel(BaseModel, extra="forbid"):
    intervals: list[tuple[float, float]] = Field(default_factory=list)
    tail_start: int = 80000


class RegionModel(BaseModel, extra="forbid"):
    label: str
    center: tuple[int, int]
    radius: float = 2.0


class StructuralModel(BaseModel, extra="forbid"):
    regions: list[RegionModel] = Field(default_factory=list)


class ScenarioModel(BaseModel, extra="forbid"):
    grid: GridModel
    params: ParamsModel | None = None
    electrodes: list[ElectrodeModel] = Field(default_factory=list)
    electrode_grid: ElectrodeGridModel | None = None
    inputs: tuple[str, str] = ("E7", "E17")
    pairs: list[Literal["01", "10", "11"]] = Field(default_factory=lambda: ["01", "10", "11"])
    n_iters: int = 142000
    stimulus: StimulusModel | None = None
    cadence: CadenceModel | None = None
    record_frames: bool = False
    analyses: list[Literal["structural", "frequency", "activity", "spiking"]] = Field(
        default_factory=list
    )
    spiking: SpikingModel | None = None
    frequency: FrequencyModel | None = None
    activity: ActivityModel | None = None
    structural: StructuralModel | None = None
    output: str | None = None

    def to_config(self) -> dict:
        return self.model_dump(exclude_none=True)


class SimulateRequest(BaseModel, extra="forbid"):
    scenario: ScenarioModel
    output_dir: str
    overrides: dict[str, Any] = Field(
        default_factory=dict, description="dotted-path config overrides"
    )


class SimulateResponse(BaseModel):
    output_dir: str
    summary: dict


class SweepRequest(BaseModel, extra="forbid"):
    scenario: ScenarioModel
    parameter: str
    values: list[float]
    output_dir: str
    overrides: dict[str, Any] = Field(default_factory=dict)


class SweepResponse(BaseModel):
    output_dir: str
    report: dict


class AnalyzeRequest(BaseModel, extra="forbid"):
    artifact_dir: str
    mode: Literal["spiking", "frequency", "activity", "structural"]
    options: dict[str, Any] = Field(default_factory=dict)
    config_path: str | None = Field(
        default=None, description="scenario config supplying grid, regions, intervals"
    )
    output_dir: str | None = None


class AnalyzeResponse(BaseModel):
    mode: str
    result: dict


class RenderRequest(BaseModel, extra="forbid"):
    input_path: str
    output_path: str
    config_path: str | None = None


class RenderResponse(BaseModel):
    written: str


class HealthResponse(BaseModel):
    status: str
    version: str


class ErrorBody(BaseModel):
    error: str
    exit_code: int
