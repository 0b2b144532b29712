"""Poisson point process drops and nearest-neighbour queries.

Every role is an independent planar homogeneous PPP over the square
[0, sqrt(S)]^2; UAVs are lifted to the configured altitude and every other
node sits on the ground. Node ids are ``4 * k + role`` (k = index within the
role), so ids stay stable when a sweep changes another role's count.
"""

from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.spatial import cKDTree
from scipy.stats import poisson

from . import seeding
from .config import Scenario, SimConfig


class Role(enum.IntEnum):
    BASE_STATION = 0
    UAV = 1
    GROUND_UE = 2
    EAVESDROPPER = 3


ROLE_NAMES = {
    Role.BASE_STATION: "BaseStation",
    Role.UAV: "Uav",
    Role.GROUND_UE: "GroundUe",
    Role.EAVESDROPPER: "Eavesdropper",
}


@dataclass(frozen=True)
class Node:
    id: int
    role: Role
    position: tuple[float, float, float]


def sample_ppp(area_m2, density_per_m2, rng):
    """Homogeneous PPP on the square of area ``area_m2``; returns (n, 2).

    The count is drawn by inverse CDF from a single uniform and positions
    come next on the stream, so for a fixed stream a denser process contains
    the sparser one as a prefix.
    """
    mean = density_per_m2 * area_m2
    u = rng.random()
    n = 0 if mean <= 0.0 else int(poisson.ppf(u, mean)) if u > 0.0 else 0
    side = math.sqrt(area_m2)
    return rng.random((n, 2)) * side


def distance3(a, b):
    """Raw Euclidean distance between two points (rows broadcast)."""
    d = np.asarray(a, dtype=float) - np.asarray(b, dtype=float)
    return np.sqrt(np.sum(d * d, axis=-1))


def propagation_distance(a, b, min_link_distance_m=1.0):
    return np.maximum(distance3(a, b), min_link_distance_m)


class Deployment:
    """One sampled drop. Arrays are sorted by node id."""

    def __init__(self, ids, roles, positions, scenario):
        order = np.argsort(ids, kind="stable")
        self.ids = np.asarray(ids, dtype=np.int64)[order]
        self.roles = np.asarray(roles, dtype=np.int8)[order]
        self.positions = np.asarray(positions, dtype=float).reshape(-1, 3)[order]
        self.scenario = Scenario(scenario)
        for arr in (self.ids, self.roles, self.positions):
            arr.flags.writeable = False

    def __len__(self):
        return len(self.ids)

    @cached_property
    def counts(self):
        return {role: int(np.count_nonzero(self.roles == role)) for role in Role}

    def rows(self, *roles):
        return np.flatnonzero(np.isin(self.roles, [int(r) for r in roles]))

    @cached_property
    def bs_rows(self):
        """Rows of the serving base stations for this scenario."""
        if self.scenario is Scenario.FLYING_BS:
            return self.rows(Role.UAV)
        return self.rows(Role.BASE_STATION)

    @cached_property
    def ue_rows(self):
        """Rows of transmitting UEs (ground UEs, plus UAVs when they are UEs)."""
        if self.scenario is Scenario.FLYING_BS:
            return self.rows(Role.GROUND_UE)
        return self.rows(Role.GROUND_UE, Role.UAV)

    @cached_property
    def eaves_rows(self):
        return self.rows(Role.EAVESDROPPER)

    @cached_property
    def eaves_index(self):
        return self.index(self.eaves_rows)

    def row_of(self, node_ids):
        node_ids = np.asarray(node_ids, dtype=np.int64)
        rows = np.searchsorted(self.ids, node_ids)
        if np.any(rows >= len(self.ids)) or np.any(self.ids[np.minimum(rows, len(self.ids) - 1)] != node_ids):
            raise KeyError("unknown node id")
        return rows

    def node(self, node_id):
        r = int(self.row_of(node_id))
        return Node(int(self.ids[r]), Role(int(self.roles[r])), tuple(float(v) for v in self.positions[r]))

    @property
    def nodes(self):
        return [Node(int(i), Role(int(r)), tuple(float(v) for v in p))
                for i, r, p in zip(self.ids, self.roles, self.positions)]

    def index(self, rows) -> "SpatialIndex":
        rows = np.asarray(rows, dtype=np.int64)
        return SpatialIndex(self.positions[rows], self.ids[rows])


def place_nodes(cfg: SimConfig, seed: int) -> Deployment:
    """Sample every role's PPP for drop ``seed``; each role owns a substream."""
    plan = [
        (Role.BASE_STATION, cfg.bs_density_per_m2, seeding.STREAM_BS, 0.0),
        (Role.UAV, cfg.uav_density_per_m2, seeding.STREAM_UAV, cfg.uav_altitude_m),
        (Role.GROUND_UE, cfg.ue_density_per_m2, seeding.STREAM_UE, 0.0),
        (Role.EAVESDROPPER, cfg.eaves_density_per_m2, seeding.STREAM_EAVES, 0.0),
    ]
    if cfg.scenario is Scenario.FLYING_BS:
        # UAVs are the base stations here; ground BSs are absent by definition
        plan[0] = (Role.BASE_STATION, 0.0, seeding.STREAM_BS, 0.0)
    ids, roles, pos = [], [], []
    for role, density, key, z in plan:
        xy = sample_ppp(cfg.area_m2, density, seeding.stream(seed, key))
        n = len(xy)
        ids.append(4 * np.arange(n, dtype=np.int64) + int(role))
        roles.append(np.full(n, int(role), dtype=np.int8))
        pos.append(np.column_stack([xy, np.full(n, z)]))
    return Deployment(np.concatenate(ids), np.concatenate(roles),
                      np.concatenate(pos), cfg.scenario)


def nearest_brute(positions, ids, query, exclude=None):
    """Exhaustive nearest neighbour; ties go to the lowest id."""
    positions = np.asarray(positions, dtype=float).reshape(-1, 3)
    ids = np.asarray(ids, dtype=np.int64)
    best_id, best_d = None, math.inf
    for p, i in zip(positions, ids):
        if exclude is not None and i == exclude:
            continue
        d = float(distance3(p, query))
        if d < best_d or (d == best_d and i < best_id):
            best_id, best_d = int(i), d
    if best_id is None:
        raise ValueError("nearest: empty candidate set")
    return best_id, best_d


class SpatialIndex:
    """Nearest-neighbour index over a fixed point set.

    Candidates come from a k-d tree; the winner is re-decided with the same
    distance formula as ``nearest_brute`` so answers (ids and distances)
    agree exactly. Queries whose candidate list might be cut inside a
    near-tie fall back to an exhaustive scan. Sets below ``BRUTE_LIMIT``
    points are scanned directly.
    """

    BRUTE_LIMIT = 64
    K = 4

    def __init__(self, positions, ids, brute_limit=None):
        self.positions = np.asarray(positions, dtype=float).reshape(-1, 3)
        self.ids = np.asarray(ids, dtype=np.int64)
        order = np.argsort(self.ids, kind="stable")
        self.positions, self.ids = self.positions[order], self.ids[order]
        limit = self.BRUTE_LIMIT if brute_limit is None else brute_limit
        self._tree = cKDTree(self.positions) if len(self.ids) and len(self.ids) >= limit else None

    def __len__(self):
        return len(self.ids)

    def query(self, points, exclude=None):
        """Nearest indexed node for each query row.

        ``exclude`` is an optional per-query id (use -1 for none) that may not
        be returned. Returns (ids, distances).
        """
        points = np.asarray(points, dtype=float).reshape(-1, 3)
        m = len(points)
        excl = np.full(m, -1, dtype=np.int64) if exclude is None else np.asarray(exclude, dtype=np.int64).reshape(m)
        if m and len(self.ids) == 0:
            raise ValueError("nearest: empty candidate set")
        if m == 0:
            return np.empty(0, dtype=np.int64), np.empty(0)
        if self._tree is None:
            return self._scan(points, excl, np.arange(m))
        k = min(self.K, len(self.ids))
        dtree, cand = self._tree.query(points, k=k)
        cand = cand.reshape(m, k)
        dtree = dtree.reshape(m, k)
        d = distance3(self.positions[cand], points[:, None, :])
        d = np.where(self.ids[cand] == excl[:, None], np.inf, d)
        # lexicographic (distance, id) minimum over the candidates
        cid = self.ids[cand]
        best = np.argmin(d, axis=1)
        dmin = d[np.arange(m), best]
        tie = (d == dmin[:, None])
        cid_tie = np.where(tie, cid, np.iinfo(np.int64).max)
        best_id = cid_tie.min(axis=1)
        # the k-th candidate bounds the unseen points; near it, rescan exhaustively
        if k == len(self.ids):
            unsafe = ~np.isfinite(dmin)
        else:
            unsafe = ~(dtree[:, -1] > dmin * (1.0 + 1e-9) + 1e-12) | ~np.isfinite(dmin)
        out_id, out_d = best_id, dmin
        if np.any(unsafe):
            idx = np.flatnonzero(unsafe)
            sid, sd = self._scan(points[idx], excl[idx], idx)
            out_id = out_id.copy()
            out_d = out_d.copy()
            out_id[idx], out_d[idx] = sid, sd
        return out_id, out_d

    def _scan(self, points, excl, _):
        d = distance3(self.positions[None, :, :], points[:, None, :])
        d = np.where(self.ids[None, :] == excl[:, None], np.inf, d)
        # ids are sorted, so argmin returns the lowest id among exact ties
        best = np.argmin(d, axis=1)
        dmin = d[np.arange(len(points)), best]
        if not np.all(np.isfinite(dmin)):
            raise ValueError("nearest: empty candidate set")
        return self.ids[best], dmin


def nearest(index: SpatialIndex, query, exclude=None):
    """(node id, distance) of the indexed node closest to ``query``."""
    ids, d = index.query(np.asarray(query, dtype=float)[None, :],
                         None if exclude is None else [exclude])
    return int(ids[0]), float(d[0])


def write_deployment_csv(deployment: Deployment, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["id", "role", "x", "y", "z"])
        for i, r, p in zip(deployment.ids, deployment.roles, deployment.positions):
            w.writerow([int(i), ROLE_NAMES[Role(int(r))], repr(float(p[0])),
                        repr(float(p[1])), repr(float(p[2]))])
