from .dynamics import Action, Diagnostics, WorldState, step
from .expert import (ExpertTrackingError, RoutePlan, expert_step,
                     sample_spawn, spawn_on_edge)
from .geometry import wrap_angle
from .network import RoadNetwork, TurnQuery, build_town, town_from_json, town_to_json
from .observe import Observation, camera_set, render_observation

__all__ = [
    "Action", "Diagnostics", "WorldState", "step",
    "ExpertTrackingError", "RoutePlan", "expert_step",
    "sample_spawn", "spawn_on_edge",
    "wrap_angle",
    "RoadNetwork", "TurnQuery", "build_town", "town_from_json", "town_to_json",
    "Observation", "camera_set", "render_observation",
]
