"""Grid-town road networks: build, query, serialize.

A town is a rectangular grid of intersections with one lane per direction.
The outer ring road turns through smoothed corner bends that belong to edges
(corners are not intersections). T-junctions come from deleting interior arms
under a per-town orientation quota, so the two towns never share a
junction-kind histogram. Junction kinds name the missing arm: t_north means
the northern arm is absent.
"""

import json
from dataclasses import dataclass, field

import numpy as np

from ..config import WorldConfig
from .geometry import (
    corner_join, offset_polyline, point_on_polyline, polyline_lengths,
    project_to_polyline, trim_polyline, unit,
)

COMPASS = {"n": np.array([0.0, 1.0]), "s": np.array([0.0, -1.0]),
           "e": np.array([1.0, 0.0]), "w": np.array([-1.0, 0.0])}
_OPPOSITE = {"n": "s", "s": "n", "e": "w", "w": "e"}

FOUR_WAY = "four_way"

# (nx, ny, spacing, (vertical deletions, horizontal deletions))
_TOWNS = {
    "A": (6, 5, 40.0, (2, 1)),
    "B": (5, 6, 50.0, (1, 2)),
}


@dataclass
class Node:
    idx: int
    pos: np.ndarray
    kind: str = FOUR_WAY
    # compass -> (neighbor node idx, road idx, local outgoing leg direction)
    arms: dict = field(default_factory=dict)


@dataclass
class Road:
    idx: int
    a: int
    b: int
    axis: np.ndarray          # node-to-node polyline, may include ring bends


@dataclass
class Edge:
    idx: int
    src: int
    dst: int
    road: int
    lane_width: float
    lane: np.ndarray          # right-offset centerline, trimmed at junction squares
    cum: np.ndarray = field(default=None, repr=False)
    length: float = 0.0

    def __post_init__(self):
        if self.cum is None:
            self.cum = polyline_lengths(self.lane)
            self.length = float(self.cum[-1])

    @property
    def start_dir(self) -> np.ndarray:
        return unit(self.lane[1] - self.lane[0])

    @property
    def end_dir(self) -> np.ndarray:
        return unit(self.lane[-1] - self.lane[-2])


@dataclass
class TurnQuery:
    at_junction: bool
    node: int | None
    edge: int | None
    turns: frozenset


class RoadNetwork:
    def __init__(self, name: str, seed: int, cfg: WorldConfig,
                 nodes: list[Node], roads: list[Road], edges: list[Edge]):
        self.name = name
        self.seed = seed
        self.cfg = cfg
        self.nodes = nodes
        self.roads = roads
        self.edges = edges
        self._finalize()

    def _finalize(self):
        cfg = self.cfg
        self.node_pos = np.array([n.pos for n in self.nodes])
        half = cfg.lane_width  # full road half-width: one lane each direction
        rects = []
        for road in self.roads:
            pts = road.axis
            for i in range(len(pts) - 1):
                a, b = pts[i], pts[i + 1]
                lo = np.minimum(a, b) - half
                hi = np.maximum(a, b) + half
                rects.append([lo[0], lo[1], hi[0], hi[1]])
        for n in self.nodes:
            p = n.pos
            j = cfg.junction_half
            rects.append([p[0] - j, p[1] - j, p[0] + j, p[1] + j])
        self.rects = np.array(rects)
        self.rect_centers = np.stack([(self.rects[:, 0] + self.rects[:, 2]) / 2,
                                      (self.rects[:, 1] + self.rects[:, 3]) / 2], axis=1)
        self.rect_radii = np.linalg.norm(
            self.rects[:, 2:] - self.rect_centers, axis=1)
        lo = self.rects[:, :2].min(axis=0)
        hi = self.rects[:, 2:].max(axis=0)
        self.bounds = (lo, hi)
        # directed edge leaving `node` along `arm`
        self.exit_edge: dict[tuple[int, str], int] = {}
        for e in self.edges:
            src_node = self.nodes[e.src]
            for arm, (nbr, road_idx, _vec) in src_node.arms.items():
                if road_idx == e.road and nbr == e.dst:
                    self.exit_edge[(e.src, arm)] = e.idx

    # -- queries ---------------------------------------------------------------

    def region_node(self, pos) -> int | None:
        """Node whose sub-task label region contains pos (regions are disjoint)."""
        d = np.abs(self.node_pos - np.asarray(pos)).max(axis=1)
        k = int(np.argmin(d))
        return k if d[k] <= self.cfg.region_half else None

    def on_road(self, pos) -> bool:
        x, y = float(pos[0]), float(pos[1])
        r = self.rects
        hit = (r[:, 0] <= x) & (x <= r[:, 2]) & (r[:, 1] <= y) & (y <= r[:, 3])
        return bool(hit.any())

    def in_bounds(self, pos, margin: float = 5.0) -> bool:
        lo, hi = self.bounds
        return bool(np.all(np.asarray(pos) >= lo - margin) and
                    np.all(np.asarray(pos) <= hi + margin))

    def locate_edge(self, pos, heading: float) -> int:
        """Directed edge best matching a pose: nearby and heading-aligned.

        Cost uses the true distance to the projected point, not the lateral
        offset: a collinear lane past the junction ahead would otherwise tie
        the lane the vehicle is actually on.
        """
        p = np.asarray(pos, float)
        hd = np.array([np.cos(heading), np.sin(heading)])
        best, best_cost = 0, np.inf
        for e in self.edges:
            s, _off, seg = project_to_polyline(e.lane, e.cum, p)
            near = point_on_polyline(e.lane, e.cum, s)
            d = unit(e.lane[seg + 1] - e.lane[seg])
            cost = float(np.linalg.norm(p - near)) + 6.0 * (1.0 - float(d @ hd))
            if cost < best_cost:
                best, best_cost = e.idx, cost
        return best

    def turn_directions(self, node_idx: int, approach_vec) -> dict[str, str]:
        """Map exit arm -> {left,right,straight} relative to an approach direction."""
        res = {}
        av = unit(np.asarray(approach_vec, float))
        for arm, (_nbr, _road, vec) in self.nodes[node_idx].arms.items():
            dot = float(av @ vec)
            cross = float(av[0] * vec[1] - av[1] * vec[0])
            if dot > 0.5:
                res[arm] = "straight"
            elif cross > 0.5:
                res[arm] = "left"
            elif cross < -0.5:
                res[arm] = "right"
        return res

    def available_turns(self, state, lookahead: float = 30.0) -> TurnQuery:
        """Turns available at the junction the vehicle is approaching.

        Not-at-junction (beyond lookahead) reports an empty set with the flag
        cleared; every actual junction offers at least two exits.
        """
        edge = self.edges[self.locate_edge((state.x, state.y), state.heading)]
        dist = float(np.linalg.norm(self.nodes[edge.dst].pos - np.array([state.x, state.y])))
        if dist > lookahead:
            return TurnQuery(False, None, edge.idx, frozenset())
        dirs = self.turn_directions(edge.dst, edge.end_dir)
        back = self._arm_between(edge.dst, edge.src, edge.road)
        turns = frozenset(t for arm, t in dirs.items() if arm != back)
        return TurnQuery(True, edge.dst, edge.idx, turns)

    def _arm_between(self, node_idx: int, nbr_idx: int, road_idx: int) -> str | None:
        for arm, (nbr, road, _vec) in self.nodes[node_idx].arms.items():
            if nbr == nbr_idx and road == road_idx:
                return arm
        return None

    def exits_from(self, edge_idx: int) -> dict[str, int]:
        """At the junction ahead of a directed edge: turn direction -> next edge idx."""
        edge = self.edges[edge_idx]
        node = edge.dst
        dirs = self.turn_directions(node, edge.end_dir)
        back = self._arm_between(node, edge.src, edge.road)
        out = {}
        for arm, turn in dirs.items():
            if arm == back:
                continue
            nxt = self.exit_edge.get((node, arm))
            if nxt is not None:
                out[turn] = nxt
        return out

    def kind_histogram(self) -> dict[str, int]:
        hist: dict[str, int] = {}
        for n in self.nodes:
            hist[n.kind] = hist.get(n.kind, 0) + 1
        return hist


# -- construction --------------------------------------------------------------

def _kind_from_arms(arms: dict) -> str:
    missing = set("nsew") - set(arms)
    if not missing:
        return FOUR_WAY
    if len(missing) == 1:
        return f"t_{ {'n': 'north', 's': 'south', 'e': 'east', 'w': 'west'}[missing.pop()] }"
    raise ValueError(f"node with {4 - len(missing)} arms is not a junction")


def build_town(town: str, seed: int, cfg: WorldConfig | None = None) -> RoadNetwork:
    """Deterministic road network for a town id; seed picks the T-junction placement."""
    if town not in _TOWNS:
        raise ValueError(f"unknown town {town!r}; have {sorted(_TOWNS)}")
    cfg = cfg or WorldConfig()
    nx, ny, spacing, (want_v, want_h) = _TOWNS[town]
    rng = np.random.default_rng(seed * 7919 + ord(town[0]))

    corners = {(0, 0), (nx - 1, 0), (0, ny - 1), (nx - 1, ny - 1)}
    grid_ids: dict[tuple[int, int], int] = {}
    nodes: list[Node] = []
    for j in range(ny):
        for i in range(nx):
            if (i, j) in corners:
                continue
            grid_ids[(i, j)] = len(nodes)
            nodes.append(Node(len(nodes), np.array([i * spacing, j * spacing])))

    def interior(i, j):
        return 1 <= i <= nx - 2 and 1 <= j <= ny - 2

    vert = [((i, j), (i, j + 1)) for i in range(1, nx - 1) for j in range(1, ny - 2)
            if interior(i, j) and interior(i, j + 1)]
    horiz = [((i, j), (i + 1, j)) for i in range(1, nx - 2) for j in range(1, ny - 1)
             if interior(i, j) and interior(i + 1, j)]

    # draw endpoint-disjoint deletions under the orientation quota
    while True:
        picks = list(rng.choice(len(vert), size=want_v, replace=False)) if want_v else []
        deleted = [vert[k] for k in picks]
        picks_h = list(rng.choice(len(horiz), size=want_h, replace=False)) if want_h else []
        deleted += [horiz[k] for k in picks_h]
        ends = [p for pair in deleted for p in pair]
        if len(set(ends)) == len(ends):
            break
    deleted_set = {frozenset(d) for d in deleted}

    # straight arms between adjacent grid nodes
    arm_pairs = []
    for (i, j) in grid_ids:
        for (di, dj) in ((1, 0), (0, 1)):
            other = (i + di, j + dj)
            if other in grid_ids and frozenset(((i, j), other)) not in deleted_set:
                arm_pairs.append(((i, j), other))

    roads: list[Road] = []

    def add_road(pa, pb, axis):
        road = Road(len(roads), grid_ids[pa], grid_ids[pb], np.asarray(axis, float))
        roads.append(road)
        return road

    compass_of = {(1, 0): "e", (-1, 0): "w", (0, 1): "n", (0, -1): "s"}
    for pa, pb in arm_pairs:
        road = add_road(pa, pb, [nodes[grid_ids[pa]].pos, nodes[grid_ids[pb]].pos])
        di, dj = pb[0] - pa[0], pb[1] - pa[1]
        arm_ab = compass_of[(np.sign(di), np.sign(dj))]
        nodes[road.a].arms[arm_ab] = (road.b, road.idx, COMPASS[arm_ab].copy())
        nodes[road.b].arms[_OPPOSITE[arm_ab]] = (road.a, road.idx,
                                                 COMPASS[_OPPOSITE[arm_ab]].copy())

    # ring corner roads through the four bend points
    for (ci, cj) in corners:
        # neighbors of the corner along the ring
        na = (ci + (1 if ci == 0 else -1), cj)
        nb = (ci, cj + (1 if cj == 0 else -1))
        bend = np.array([ci * spacing, cj * spacing])
        road = add_road(na, nb, [nodes[grid_ids[na]].pos, bend, nodes[grid_ids[nb]].pos])
        va = unit(bend - nodes[grid_ids[na]].pos)
        vb = unit(bend - nodes[grid_ids[nb]].pos)
        arm_a = compass_of[(round(va[0]), round(va[1]))]
        arm_b = compass_of[(round(vb[0]), round(vb[1]))]
        nodes[road.a].arms[arm_a] = (road.b, road.idx, va)
        nodes[road.b].arms[arm_b] = (road.a, road.idx, vb)

    for n in nodes:
        n.kind = _kind_from_arms(n.arms)

    # connectivity: every node reachable over remaining roads
    adj: dict[int, list[int]] = {n.idx: [] for n in nodes}
    for r in roads:
        adj[r.a].append(r.b)
        adj[r.b].append(r.a)
    seen = {0}
    frontier = [0]
    while frontier:
        cur = frontier.pop()
        for nxt in adj[cur]:
            if nxt not in seen:
                seen.add(nxt)
                frontier.append(nxt)
    if len(seen) != len(nodes):
        raise RuntimeError(f"town {town} seed {seed}: deletions disconnected the grid")

    edges: list[Edge] = []
    half_lane = cfg.lane_width / 2.0
    for road in roads:
        for (src, dst, axis) in ((road.a, road.b, road.axis),
                                 (road.b, road.a, road.axis[::-1])):
            lane = offset_polyline(axis, half_lane, cfg.junction_half)
            cum = polyline_lengths(lane)
            lane = trim_polyline(lane, cfg.junction_half, cum[-1] - cfg.junction_half)
            edges.append(Edge(len(edges), src, dst, road.idx, cfg.lane_width, lane))

    return RoadNetwork(town, seed, cfg, nodes, roads, edges)


# -- serialization -------------------------------------------------------------

def _pts(arr) -> list:
    return [[float(x), float(y)] for x, y in arr]


def town_to_json(net: RoadNetwork) -> str:
    doc = {
        "format_version": 1,
        "name": net.name,
        "seed": net.seed,
        "lane_width": float(net.cfg.lane_width),
        "junction_half": float(net.cfg.junction_half),
        "region_half": float(net.cfg.region_half),
        "nodes": [{"id": n.idx, "x": float(n.pos[0]), "y": float(n.pos[1]),
                   "kind": n.kind,
                   "arms": {a: {"neighbor": int(v[0]), "road": int(v[1]),
                                "dir": [float(v[2][0]), float(v[2][1])]}
                            for a, v in sorted(n.arms.items())}}
                  for n in net.nodes],
        "roads": [{"id": r.idx, "a": r.a, "b": r.b, "axis": _pts(r.axis)}
                  for r in net.roads],
        "edges": [{"id": e.idx, "src": e.src, "dst": e.dst, "road": e.road,
                   "lane_width": float(e.lane_width), "centerline": _pts(e.lane)}
                  for e in net.edges],
    }
    return json.dumps(doc, sort_keys=True, separators=(",", ":"))


def town_from_json(text: str, cfg: WorldConfig | None = None) -> RoadNetwork:
    doc = json.loads(text)
    if doc.get("format_version") != 1:
        raise ValueError(f"unsupported town format_version {doc.get('format_version')!r}")
    cfg = cfg or WorldConfig()
    nodes = []
    for nd in doc["nodes"]:
        node = Node(nd["id"], np.array([nd["x"], nd["y"]]), nd["kind"])
        node.arms = {a: (v["neighbor"], v["road"], np.array(v["dir"]))
                     for a, v in nd["arms"].items()}
        nodes.append(node)
    roads = [Road(r["id"], r["a"], r["b"], np.array(r["axis"])) for r in doc["roads"]]
    edges = [Edge(e["id"], e["src"], e["dst"], e["road"], e["lane_width"],
                  np.array(e["centerline"])) for e in doc["edges"]]
    return RoadNetwork(doc["name"], doc["seed"], cfg, nodes, roads, edges)
