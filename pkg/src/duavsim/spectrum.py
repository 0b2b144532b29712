"""Mode selection and the two spectrum-sharing strategies.

A plan is built in stages, each a pure function of the previous stage:

    select_modes -> assign_patterns -> partition_bandwidth -> detect_idle
    -> (new strategy) select_jammers

Subchannels are numbered with the cellular ones first (one per cellular UE)
followed by one per overlay D2D UE. Underlay UEs transmit on the host's
subchannel.
"""

from __future__ import annotations

import csv
import enum
from dataclasses import dataclass, field, replace

import numpy as np

from .config import BetaInterpretation, SimConfig, Strategy, dbm_to_mw
from .deployment import Deployment, Role, distance3


class DegenerateDrop(RuntimeError):
    """The drop lacks a serving BS or a usable UE population."""


class Mode(enum.IntEnum):
    CELLULAR = 0
    D2D = 1


class Pattern(enum.IntEnum):
    CELLULAR = 0
    OVERLAY = 1
    UNDERLAY = 2
    IDLE = 3


PATTERN_NAMES = {
    Pattern.CELLULAR: "cellular",
    Pattern.OVERLAY: "overlay",
    Pattern.UNDERLAY: "underlay",
    Pattern.IDLE: "idle",
}

TAG_OVERLAY = "overlay"
TAG_CELLULAR = "cellular"


def tx_power_mw(roles, cfg: SimConfig):
    """Data transmit power by role: UAVs use P_A, everything else P_U."""
    roles = np.asarray(roles)
    return np.where(roles == Role.UAV, cfg.uav_tx_mw, cfg.ue_tx_mw)


@dataclass(frozen=True)
class ModeSelection:
    mode: np.ndarray          # per UE: Mode
    bs_ids: np.ndarray        # nearest serving BS
    bs_dist: np.ndarray
    peer_ids: np.ndarray      # nearest other UE
    peer_dist: np.ndarray

    @property
    def receiver_ids(self):
        return np.where(self.mode == Mode.CELLULAR, self.bs_ids, self.peer_ids)


def _leg_rss(dep, ue_rows, other_ids, dist, cfg):
    other_z = dep.positions[dep.row_of(other_ids), 2]
    air = (dep.positions[ue_rows, 2] > 0.0) | (other_z > 0.0)
    alpha = np.where(air, cfg.alpha_air, cfg.alpha_ground)
    p = tx_power_mw(dep.roles[ue_rows], cfg)
    return p * np.power(np.maximum(dist, cfg.min_link_distance_m), -alpha)


def select_modes(dep: Deployment, cfg: SimConfig) -> ModeSelection:
    """RSS mode selection for every transmitting UE, fading excluded.

    Cellular iff the mean RSS at the closest serving BS strictly exceeds the
    mean RSS at the closest other UE; each leg uses its own exponent.
    """
    ue_rows = dep.ue_rows
    if len(dep.bs_rows) == 0:
        raise DegenerateDrop("no serving base station")
    if len(ue_rows) < 2:
        raise DegenerateDrop("fewer than two UEs")
    pts = dep.positions[ue_rows]
    bs_ids, bs_d = dep.index(dep.bs_rows).query(pts)
    peer_ids, peer_d = dep.index(ue_rows).query(pts, exclude=dep.ids[ue_rows])
    rss_bs = _leg_rss(dep, ue_rows, bs_ids, bs_d, cfg)
    rss_peer = _leg_rss(dep, ue_rows, peer_ids, peer_d, cfg)
    mode = np.where(rss_bs > rss_peer, Mode.CELLULAR, Mode.D2D).astype(np.int8)
    return ModeSelection(mode, bs_ids, bs_d, peer_ids, peer_d)


def select_mode(ue_id, dep: Deployment, cfg: SimConfig) -> Mode:
    """Single-UE form of ``select_modes``."""
    sel = select_modes(dep, cfg)
    k = int(np.searchsorted(dep.ids[dep.ue_rows], ue_id))
    return Mode(int(sel.mode[k]))


def pair_d2d(ue_id, dep: Deployment, cfg: SimConfig):
    """Receiver of a UE: nearest other UE for D2D, nearest BS for cellular."""
    sel = select_modes(dep, cfg)
    k = int(np.searchsorted(dep.ids[dep.ue_rows], ue_id))
    return int(sel.receiver_ids[k])


@dataclass(frozen=True)
class SpectrumPlan:
    strategy: Strategy
    ue_ids: np.ndarray
    mode: np.ndarray
    receiver_ids: np.ndarray
    pattern: np.ndarray
    host_ids: np.ndarray          # underlay host UE id, -1 otherwise
    subchannel: np.ndarray        # -1 when idle
    bandwidth_hz: np.ndarray
    n_cellular_subchannels: int = 0
    n_overlay_subchannels: int = 0
    fallback_count: int = 0
    threshold_idle: np.ndarray | None = None   # idled by the beta test
    jammers: dict = field(default_factory=dict)  # subchannel -> jammer ids
    tagged: dict = field(default_factory=dict)   # TAG_* -> UE id

    def count(self, pattern):
        return int(np.count_nonzero(self.pattern == pattern))

    @property
    def n_cellular(self):
        return self.count(Pattern.CELLULAR)

    @property
    def n_overlay(self):
        return self.count(Pattern.OVERLAY)

    @property
    def n_underlay(self):
        return self.count(Pattern.UNDERLAY)

    @property
    def n_idle(self):
        return self.count(Pattern.IDLE)

    def k(self, ue_id):
        k = int(np.searchsorted(self.ue_ids, ue_id))
        if k >= len(self.ue_ids) or self.ue_ids[k] != ue_id:
            raise KeyError(f"UE {ue_id} not in plan")
        return k

    @property
    def active(self):
        return self.pattern != Pattern.IDLE

    def idle_ids(self):
        return self.ue_ids[self.pattern == Pattern.IDLE]

    def subchannel_bandwidth(self, subchannel):
        sel = (self.subchannel == subchannel) & (self.pattern != Pattern.UNDERLAY)
        bw = self.bandwidth_hz[sel]
        return float(bw[0]) if len(bw) else 0.0


def assign_patterns(mode, strategy: Strategy, cfg: SimConfig, rng):
    """Overlay/underlay split and host choice for the D2D UEs.

    Three uniforms are drawn per UE whatever its mode or the strategy, so
    two strategies run on the same stream make the same coin flips.
    Returns (pattern, host_index, fallback_count); host_index indexes the
    UE array and is -1 for non-underlay UEs.
    """
    strategy = Strategy(strategy)
    mode = np.asarray(mode)
    n = len(mode)
    u_under, u_class, u_host = rng.random((3, n))
    d2d = mode == Mode.D2D
    pattern = np.where(d2d, np.where(u_under < cfg.underlay_prob, Pattern.UNDERLAY, Pattern.OVERLAY),
                       Pattern.CELLULAR).astype(np.int8)
    cellular = np.flatnonzero(pattern == Pattern.CELLULAR)
    overlay = np.flatnonzero(pattern == Pattern.OVERLAY)
    host = np.full(n, -1, dtype=np.int64)
    under = np.flatnonzero(pattern == Pattern.UNDERLAY)
    if strategy is Strategy.TRADITIONAL:
        on_cell = np.ones(len(under), dtype=bool)
    else:
        on_cell = u_class[under] < cfg.eta
    fallback = 0
    if strategy is Strategy.NEW and (len(cellular) == 0) != (len(overlay) == 0):
        # exactly one host class is empty: move its draws to the other class
        stranded = on_cell if len(cellular) == 0 else ~on_cell
        fallback = int(np.count_nonzero(stranded))
        on_cell[:] = len(cellular) > 0
    for mask, pool in ((on_cell, cellular), (~on_cell, overlay)):
        idx = under[mask]
        if len(pool) == 0:
            pattern[idx] = Pattern.IDLE
            continue
        pick = np.minimum((u_host[idx] * len(pool)).astype(np.int64), len(pool) - 1)
        host[idx] = pool[pick]
    return pattern, host, fallback


def partition_bandwidth(pattern, host, cfg: SimConfig):
    """Subchannel index and bandwidth per UE.

    eta*W is split equally over cellular UEs and (1-eta)*W over overlay UEs;
    underlay UEs inherit the host subchannel and its bandwidth.
    """
    pattern = np.asarray(pattern)
    n = len(pattern)
    sub = np.full(n, -1, dtype=np.int64)
    bw = np.zeros(n)
    cellular = np.flatnonzero(pattern == Pattern.CELLULAR)
    overlay = np.flatnonzero(pattern == Pattern.OVERLAY)
    nc, no = len(cellular), len(overlay)
    sub[cellular] = np.arange(nc)
    sub[overlay] = nc + np.arange(no)
    if nc:
        bw[cellular] = cfg.eta * cfg.bandwidth_hz / nc
    if no:
        bw[overlay] = (1.0 - cfg.eta) * cfg.bandwidth_hz / no
    under = np.flatnonzero((pattern == Pattern.UNDERLAY) & (host >= 0))
    sub[under] = sub[host[under]]
    bw[under] = bw[host[under]]
    return sub, bw, nc, no


def draft_plan(dep: Deployment, sel: ModeSelection, strategy, cfg: SimConfig, rng) -> SpectrumPlan:
    strategy = Strategy(strategy)
    ue_ids = dep.ids[dep.ue_rows]
    pattern, host, fallback = assign_patterns(sel.mode, strategy, cfg, rng)
    sub, bw, nc, no = partition_bandwidth(pattern, host, cfg)
    host_ids = np.where(host >= 0, ue_ids[np.maximum(host, 0)], -1)
    return SpectrumPlan(
        strategy=strategy, ue_ids=ue_ids, mode=sel.mode, receiver_ids=sel.receiver_ids,
        pattern=pattern, host_ids=host_ids, subchannel=sub, bandwidth_hz=bw,
        n_cellular_subchannels=nc, n_overlay_subchannels=no, fallback_count=fallback,
        threshold_idle=np.zeros(len(ue_ids), dtype=bool),
    )


def co_channel_pairs(link_sub, tx_sub):
    """All (link, transmitter) index pairs sharing a subchannel.

    ``link_sub[j]`` is link j's subchannel, ``tx_sub[i]`` transmitter i's.
    Returns (link_idx, tx_idx) arrays.
    """
    link_sub = np.asarray(link_sub, dtype=np.int64)
    tx_sub = np.asarray(tx_sub, dtype=np.int64)
    order = np.argsort(tx_sub, kind="stable")
    sorted_sub = tx_sub[order]
    start = np.searchsorted(sorted_sub, link_sub, side="left")
    stop = np.searchsorted(sorted_sub, link_sub, side="right")
    size = stop - start
    total = int(size.sum())
    link_idx = np.repeat(np.arange(len(link_sub)), size)
    offs = np.arange(total) - np.repeat(np.cumsum(size) - size, size)
    tx_idx = order[np.repeat(start, size) + offs]
    return link_idx, tx_idx


def decode_threshold(cfg: SimConfig):
    if cfg.beta_interpretation is BetaInterpretation.RSS_DBM:
        return dbm_to_mw(cfg.beta_dbm)
    return dbm_to_mw(cfg.beta_dbm - cfg.noise_dbm)


def d2d_decode_metric(plan: SpectrumPlan, dep: Deployment, channels, cfg: SimConfig):
    """Decode metric for every active D2D link with all D2D UEs on and no
    jammers. Returns (ue index array, metric array)."""
    active = plan.active
    links = np.flatnonzero(active & np.isin(plan.pattern, [Pattern.OVERLAY, Pattern.UNDERLAY]))
    tx_rows = dep.row_of(plan.ue_ids[links])
    rx_rows = dep.row_of(plan.receiver_ids[links])
    p = tx_power_mw(dep.roles[tx_rows], cfg)
    signal = channels.link_power(dep.positions[tx_rows], dep.ids[tx_rows], p,
                                 dep.positions[rx_rows], dep.ids[rx_rows])
    if cfg.beta_interpretation is BetaInterpretation.RSS_DBM:
        return links, signal
    txs = np.flatnonzero(active)
    li, ti = co_channel_pairs(plan.subchannel[links], plan.subchannel[txs])
    keep = txs[ti] != links[li]
    li, ti = li[keep], ti[keep]
    i_rows = dep.row_of(plan.ue_ids[txs[ti]])
    r_rows = rx_rows[li]
    ip = channels.link_power(dep.positions[i_rows], dep.ids[i_rows],
                             tx_power_mw(dep.roles[i_rows], cfg),
                             dep.positions[r_rows], dep.ids[r_rows])
    interference = np.bincount(li, weights=ip, minlength=len(links))
    return links, signal / (cfg.noise_mw + interference)


def detect_idle(plan: SpectrumPlan, dep: Deployment, channels, cfg: SimConfig) -> SpectrumPlan:
    """One pass: D2D links whose metric is strictly below beta go idle."""
    links, metric = d2d_decode_metric(plan, dep, channels, cfg)
    fail = links[metric < decode_threshold(cfg)]
    pattern = plan.pattern.copy()
    sub = plan.subchannel.copy()
    bw = plan.bandwidth_hz.copy()
    pattern[fail] = Pattern.IDLE
    sub[fail] = -1
    bw[fail] = 0.0
    flagged = plan.threshold_idle.copy()
    flagged[fail] = True
    return replace(plan, pattern=pattern, subchannel=sub, bandwidth_hz=bw, threshold_idle=flagged)


def region_center(cfg: SimConfig):
    c = cfg.side_m / 2.0
    return np.array([c, c])


def tag_links(plan: SpectrumPlan, dep: Deployment, cfg: SimConfig) -> SpectrumPlan:
    """Tag the active overlay UE and the cellular UE horizontally closest to
    the region centre (ties to the lowest id)."""
    xy = dep.positions[dep.row_of(plan.ue_ids), :2]
    dc = np.hypot(xy[:, 0] - region_center(cfg)[0], xy[:, 1] - region_center(cfg)[1])
    tagged = {}
    for tag, pat in ((TAG_OVERLAY, Pattern.OVERLAY), (TAG_CELLULAR, Pattern.CELLULAR)):
        cand = np.flatnonzero(plan.pattern == pat)
        if len(cand):
            best = cand[np.lexsort((plan.ue_ids[cand], dc[cand]))[0]]
            tagged[tag] = int(plan.ue_ids[best])
    return replace(plan, tagged=tagged)


def jam_metric(jammer_ids, target_id, dep: Deployment, channels, cfg: SimConfig):
    """Jamming-to-noise ratio of each jammer at ``target_id``."""
    j_rows = dep.row_of(jammer_ids)
    t_row = dep.row_of(target_id)
    p = channels.link_power(dep.positions[j_rows], dep.ids[j_rows], cfg.jammer_power_mw,
                            dep.positions[t_row], dep.ids[t_row])
    return p / cfg.noise_mw


def select_jammers(idle_ids, tx_id, rx_id, eaves_id, dep: Deployment, channels, cfg: SimConfig):
    """Strong idle UEs: jamming metric at the receiver strictly below the
    metric at the eavesdropper. The link's own endpoints never jam."""
    idle_ids = np.asarray(idle_ids, dtype=np.int64)
    idle_ids = idle_ids[(idle_ids != tx_id) & (idle_ids != rx_id)]
    if eaves_id is None or len(idle_ids) == 0:
        return np.empty(0, dtype=np.int64)
    at_rx = jam_metric(idle_ids, rx_id, dep, channels, cfg)
    at_e = jam_metric(idle_ids, eaves_id, dep, channels, cfg)
    return idle_ids[at_rx < at_e]


def write_plan_csv(plan: SpectrumPlan, path):
    jam_target = {}
    for sub, ids in plan.jammers.items():
        for j in ids:
            jam_target.setdefault(int(j), []).append(int(sub))
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["ue_id", "mode", "pattern", "subchannel", "bandwidth_hz", "host_id"])
        for k, uid in enumerate(plan.ue_ids):
            uid = int(uid)
            pat = PATTERN_NAMES[Pattern(int(plan.pattern[k]))]
            sub = int(plan.subchannel[k])
            if uid in jam_target:
                pat = "jammer"
                sub = ";".join(str(s) for s in jam_target[uid])
            mode = "cellular" if plan.mode[k] == Mode.CELLULAR else "d2d"
            host = int(plan.host_ids[k])
            w.writerow([uid, mode, pat, sub, repr(float(plan.bandwidth_hz[k])),
                        host if host >= 0 else ""])
