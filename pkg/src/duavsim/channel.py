"""Path loss, fading and SINR.

Links with an airborne endpoint (z > 0) are Rician with exponent
``alpha_air``; ground-to-ground links are Rayleigh with ``alpha_ground``.
Received power is ``P * g * max(d, d_min) ** -alpha``. Fading power gains are
unit mean and hashed from (drop seed, tx id, rx id), so every code path
asking for the same link sees the same number.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .config import SimConfig
from .deployment import Node, distance3
from .seeding import hash_uniforms

RAYLEIGH = "rayleigh"
RICIAN = "rician"


@dataclass(frozen=True)
class LinkClass:
    fading: str
    alpha: float
    k_db: float | None = None


def classify_link(tx: Node, rx: Node, cfg: SimConfig) -> LinkClass:
    if tx.position[2] > 0.0 or rx.position[2] > 0.0:
        return LinkClass(RICIAN, cfg.alpha_air, cfg.rician_k_db)
    return LinkClass(RAYLEIGH, cfg.alpha_ground)


def mean_rss(tx_power_mw, distance_m, alpha):
    return tx_power_mw * np.power(distance_m, -alpha)


def received_power(tx_power_mw, gain, distance_m, alpha):
    return tx_power_mw * gain * np.power(distance_m, -alpha)


def sinr(signal_mw, interference_mw, noise_mw):
    return signal_mw / (noise_mw + interference_mw)


def k_linear(k_db):
    return math.inf if math.isinf(k_db) and k_db > 0 else 10.0 ** (k_db / 10.0)


def fading_gains(drop_seed, tx_ids, rx_ids, rician, k_db):
    """Vectorised power gains; ``rician`` is a boolean mask per link.

    Rayleigh gains are Exponential(1). Rician gains are |h|^2 with a LoS
    amplitude sqrt(K/(K+1)) plus circular Gaussian scatter of power 1/(K+1).
    """
    u1, u2 = hash_uniforms(drop_seed, tx_ids, rx_ids, 2)
    rayleigh = -np.log(u1)
    rician = np.asarray(rician, dtype=bool)
    if not np.any(rician):
        return rayleigh
    k = k_linear(k_db)
    if math.isinf(k):
        ric = np.ones_like(u1)
    else:
        r = np.sqrt(-2.0 * np.log(u1))
        theta = 2.0 * np.pi * u2
        s = math.sqrt(1.0 / (2.0 * (k + 1.0)))
        re = math.sqrt(k / (k + 1.0)) + s * r * np.cos(theta)
        im = s * r * np.sin(theta)
        ric = re * re + im * im
    return np.where(rician, ric, rayleigh)


def draw_gain(link_class: LinkClass, tx_id, rx_id, drop_seed):
    rician = link_class.fading == RICIAN
    k_db = link_class.k_db if rician else 0.0
    g = fading_gains(drop_seed, np.atleast_1d(tx_id), np.atleast_1d(rx_id),
                     np.full(np.size(tx_id), rician), k_db)
    return float(g[0]) if np.ndim(tx_id) == 0 else g


class ChannelRealization:
    """Fading of one drop; a pure function of (drop seed, tx id, rx id, class)."""

    def __init__(self, drop_seed: int, cfg: SimConfig):
        self.drop_seed = int(drop_seed)
        self.cfg = cfg

    def gain(self, tx_id, rx_id, link_class: LinkClass):
        return draw_gain(link_class, tx_id, rx_id, self.drop_seed)

    def link_power(self, tx_pos, tx_ids, tx_power_mw, rx_pos, rx_ids):
        """Received power (mW) for each (tx, rx) pair; arrays broadcast."""
        cfg = self.cfg
        tx_pos = np.asarray(tx_pos, dtype=float)
        rx_pos = np.asarray(rx_pos, dtype=float)
        tx_ids, rx_ids = np.broadcast_arrays(np.asarray(tx_ids, dtype=np.int64),
                                             np.asarray(rx_ids, dtype=np.int64))
        d = np.maximum(distance3(tx_pos, rx_pos), cfg.min_link_distance_m)
        air = (tx_pos[..., 2] > 0.0) | (rx_pos[..., 2] > 0.0)
        air = np.broadcast_to(air, d.shape)
        alpha = np.where(air, cfg.alpha_air, cfg.alpha_ground)
        g = fading_gains(self.drop_seed, tx_ids.ravel(), rx_ids.ravel(),
                         air.ravel(), cfg.rician_k_db).reshape(d.shape)
        return received_power(tx_power_mw, g, d, alpha)
