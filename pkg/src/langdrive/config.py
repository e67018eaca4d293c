"""Run configuration: every free constant in one place, hashable for artifact stamping."""

import dataclasses
import hashlib
import json
import math
from dataclasses import dataclass, field


@dataclass(frozen=True)
class WorldConfig:
    dt: float = 0.1                  # s, 10 Hz control
    accel_max: float = 4.0           # m/s^2 at full throttle
    speed_max: float = 8.0           # m/s
    wheelbase: float = 2.5           # m
    steer_max_deg: float = 35.0      # deg, full steering deflection
    drag: float = 0.5                # 1/s, linear speed decay; full throttle sustains speed_max
    lane_width: float = 4.0          # m, one lane per direction
    junction_half: float = 8.0       # m, drivable junction square half-size
    region_half: float = 10.0        # m, sub-task label region half-size around a node
    grid_rows: int = 32              # forward cells, 1 cell = cell_size m
    grid_cols: int = 64              # lateral cells
    cell_size: float = 1.0           # m
    camera_yaw_deg: float = 14.0     # side cameras at +/- this yaw

    @property
    def steer_max(self) -> float:
        return math.radians(self.steer_max_deg)


@dataclass(frozen=True)
class ExpertConfig:
    lateral_kp: float = 1.5
    lateral_kd: float = 0.3
    longitudinal_kp: float = 0.8
    lookahead_base: float = 2.0      # m, error measured ahead of the rear axle
    lookahead_gain: float = 0.35     # s, extra lookahead per m/s
    speed_lane: float = 6.0          # m/s target on straights
    speed_turn: float = 3.0          # m/s target through turning connectors
    speed_straight_junction: float = 4.5
    slow_distance: float = 14.0      # m, begin slowing this far before a junction region
    offroad_tolerance: float = 2.0   # m, cross-track beyond this aborts collection


@dataclass(frozen=True)
class DataConfig:
    trajectories: int = 64
    ticks_per_trajectory: int = 1500
    margin_ticks: int = 20           # context prepended/appended around each snippet core
    end_span: int = 5                # final core frames labeled end=true
    boundary_window: int = 10        # ticks each side of a transition used for decision samples
    side_camera_steer_shift: float = 0.2  # steering label correction for drifted-view cameras
    min_snippet_core: int = 8        # cores shorter than this are dropped from training draws
    stop_runs_per_approach: int = 2  # braking demonstrations per junction approach with a missing exit
    stop_hold_ticks: int = 15        # stationary frames appended after each braking run


@dataclass(frozen=True)
class ModelConfig:
    embed_dim: int = 50
    instr_hidden: int = 64
    conv_channels: tuple[int, int, int] = (8, 16, 32)
    conv_kernel: int = 3
    conv_stride: int = 2
    image_dim: int = 64
    prev_task_dim: int = 16
    decision_hidden: int = 64
    low_hidden: int = 32
    token_cap: int = 40              # hard bound on instruction length
    token_pad: int = 20              # padding length for batched instruction encoding


@dataclass(frozen=True)
class TrainConfig:
    seed: int = 0
    learning_rate: float = 1e-3
    low_window: int = 30             # ticks per low-level training draw
    low_batch: int = 8
    low_steps: int = 3200
    end_steps: int = 1600
    high_batch: int = 12
    high_steps: int = 2400
    flat_window: int = 40
    flat_batch: int = 6
    flat_steps: int = 1400
    eval_every: int = 100            # loss-curve bookkeeping interval
    use_misleading: bool = False     # mix deceptive-instruction segments into high-level training
    misleading_fraction: float = 0.15  # share of misleading segments in high-level draws when enabled


@dataclass(frozen=True)
class EvalConfig:
    episodes_per_cell: int = 50
    budget_ticks: int = 1200
    vote_window: int = 3
    vote_threshold: float = 0.5
    spawn_clearance: float = 15.0    # m, minimum spawn distance to the next junction region
    workers: int = 1


@dataclass(frozen=True)
class RunConfig:
    world: WorldConfig = field(default_factory=WorldConfig)
    expert: ExpertConfig = field(default_factory=ExpertConfig)
    data: DataConfig = field(default_factory=DataConfig)
    model: ModelConfig = field(default_factory=ModelConfig)
    train: TrainConfig = field(default_factory=TrainConfig)
    eval: EvalConfig = field(default_factory=EvalConfig)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))

    @staticmethod
    def from_dict(raw: dict) -> "RunConfig":
        def build(cls, sub):
            kwargs = {}
            for f in dataclasses.fields(cls):
                if f.name in sub:
                    v = sub[f.name]
                    kwargs[f.name] = tuple(v) if isinstance(v, list) else v
            return cls(**kwargs)

        return RunConfig(
            world=build(WorldConfig, raw.get("world", {})),
            expert=build(ExpertConfig, raw.get("expert", {})),
            data=build(DataConfig, raw.get("data", {})),
            model=build(ModelConfig, raw.get("model", {})),
            train=build(TrainConfig, raw.get("train", {})),
            eval=build(EvalConfig, raw.get("eval", {})),
        )


def config_hash(cfg: RunConfig) -> str:
    """Stable hex digest stamped into datasets, bundles and reports."""
    return hashlib.sha256(cfg.to_json().encode()).hexdigest()[:16]
