"""Jamming-aware link budgets and secrecy rates for the tagged links.

Both the legitimate receiver and the eavesdropper see the co-channel
transmitters of the link's subchannel plus the jammers activated on it; no
party cancels jamming. The secrecy rate is

    B * max(0, log2(1 + SINR_rx) - log2(1 + SINR_e))

with the jamming power already inside both SINR denominators.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .config import SimConfig, Strategy
from .channel import sinr
from .deployment import Deployment
from .spectrum import TAG_CELLULAR, TAG_OVERLAY, SpectrumPlan, select_jammers, tx_power_mw


@dataclass(frozen=True)
class Link:
    tx_id: int
    rx_id: int
    subchannel: int
    bandwidth_hz: float


@dataclass(frozen=True)
class LinkBudget:
    tx_id: int
    rx_id: int
    subchannel: int
    bandwidth_hz: float
    signal_mw: float
    interference_mw: float
    jamming_mw: float
    noise_mw: float

    @property
    def sinr(self):
        return sinr(self.signal_mw, self.interference_mw + self.jamming_mw, self.noise_mw)


def link_of(plan: SpectrumPlan, ue_id) -> Link:
    k = plan.k(ue_id)
    return Link(int(ue_id), int(plan.receiver_ids[k]), int(plan.subchannel[k]),
                float(plan.bandwidth_hz[k]))


def tagged_link(plan: SpectrumPlan, tag) -> Link | None:
    uid = plan.tagged.get(tag)
    return None if uid is None else link_of(plan, uid)


def interferer_set(link: Link, plan: SpectrumPlan):
    """(co-channel active transmitter ids, jammer ids) for the link's subchannel."""
    same = plan.active & (plan.subchannel == link.subchannel) & (plan.ue_ids != link.tx_id)
    jammers = np.asarray(plan.jammers.get(link.subchannel, ()), dtype=np.int64)
    return plan.ue_ids[same], jammers


def budget(link: Link, observer_id, plan: SpectrumPlan, dep: Deployment, channels,
           cfg: SimConfig) -> LinkBudget:
    """Power terms of ``link`` as heard by ``observer_id``."""
    o_row = dep.row_of(observer_id)
    o_pos, o_id = dep.positions[o_row], dep.ids[o_row]

    def heard(ids, power):
        if len(ids) == 0:
            return 0.0
        rows = dep.row_of(ids)
        p = channels.link_power(dep.positions[rows], dep.ids[rows], power(rows), o_pos, o_id)
        return float(np.sum(p))

    def data_power(rows):
        return tx_power_mw(dep.roles[rows], cfg)

    interferers, jammers = interferer_set(link, plan)
    return LinkBudget(
        tx_id=link.tx_id, rx_id=int(observer_id), subchannel=link.subchannel,
        bandwidth_hz=link.bandwidth_hz,
        signal_mw=heard(np.array([link.tx_id]), data_power),
        interference_mw=heard(interferers, data_power),
        jamming_mw=heard(jammers, lambda rows: np.full(len(rows), cfg.jammer_power_mw)),
        noise_mw=cfg.noise_mw,
    )


def receiver_sinr(link, plan, dep, channels, cfg):
    return budget(link, link.rx_id, plan, dep, channels, cfg).sinr


def eavesdropper_sinr(link, eaves_id, plan, dep, channels, cfg):
    return budget(link, eaves_id, plan, dep, channels, cfg).sinr


def eavesdropper_for(link: Link, dep: Deployment):
    """Eavesdropper closest to the link's transmitter, or None if there are none."""
    if len(dep.eaves_rows) == 0:
        return None
    tx = dep.positions[dep.row_of(link.tx_id)]
    ids, _ = dep.eaves_index.query(tx[None, :])
    return int(ids[0])


def secrecy_rate(bandwidth_hz, sinr_rx, sinr_e):
    """Clamped secrecy rate in bit/s."""
    return bandwidth_hz * max(0.0, math.log2(1.0 + sinr_rx) - math.log2(1.0 + sinr_e))


def activate_jammers(plan: SpectrumPlan, dep: Deployment, channels, cfg: SimConfig) -> SpectrumPlan:
    """Strong-jammer selection for each tagged link (new strategy only).

    Each tagged link is judged on its own, so an idle UE may jam both.
    """
    if plan.strategy is not Strategy.NEW:
        return replace(plan, jammers={})
    idle = plan.idle_ids()
    jammers = {}
    for tag in (TAG_OVERLAY, TAG_CELLULAR):
        link = tagged_link(plan, tag)
        if link is None:
            continue
        e = eavesdropper_for(link, dep)
        jammers[link.subchannel] = select_jammers(idle, link.tx_id, link.rx_id, e, dep, channels, cfg)
    return replace(plan, jammers=jammers)


@dataclass(frozen=True)
class LinkSecrecy:
    rate_bps: float
    sinr_rx: float
    sinr_e: float | None
    eaves_id: int | None
    n_jammers: int


def link_secrecy(link: Link, plan, dep, channels, cfg) -> LinkSecrecy:
    e = eavesdropper_for(link, dep)
    s_rx = receiver_sinr(link, plan, dep, channels, cfg)
    n_jam = len(plan.jammers.get(link.subchannel, ()))
    if e is None:
        return LinkSecrecy(link.bandwidth_hz * math.log2(1.0 + s_rx), s_rx, None, None, n_jam)
    s_e = eavesdropper_sinr(link, e, plan, dep, channels, cfg)
    return LinkSecrecy(secrecy_rate(link.bandwidth_hz, s_rx, s_e), s_rx, s_e, e, n_jam)


def tagged_link_secrecy(plan: SpectrumPlan, dep: Deployment, channels, cfg: SimConfig):
    """(overlay, cellular) LinkSecrecy for the tagged links; None where a
    link could not be tagged. Jammers are activated here unless the plan
    already carries them."""
    if plan.strategy is Strategy.NEW and not plan.jammers:
        plan = activate_jammers(plan, dep, channels, cfg)
    out = []
    for tag in (TAG_OVERLAY, TAG_CELLULAR):
        link = tagged_link(plan, tag)
        out.append(None if link is None else link_secrecy(link, plan, dep, channels, cfg))
    return tuple(out)
