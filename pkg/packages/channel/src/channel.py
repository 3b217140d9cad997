"""
Line-of-sight optical channel between LED luminaries and photodiodes.

The gain of one link is

    h = η·γ·A_r/d² · L(φ) · T_s · g(ψ) · cos ψ,   ψ ≤ Ψ
    h = 0,                                          ψ > Ψ

with the Lambertian emission L(φ) = (l+1)/(2π)·cos^l φ, l = −ln 2 / ln cos Θ½, and the concentrator
gain g(ψ) = κ²/sin² Ψ. The field-of-view cutoff is applied once. Reflections are not modelled.
"""

import logging
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from packages.utils.src.errors import Errors
from packages.utils.src.data_utils import verify_positive, verify_unit_vector

logger = logging.getLogger(__name__)

LED_FACING_DOWN = (0.0, 0.0, -1.0)
PD_FACING_UP = (0.0, 0.0, 1.0)


@dataclass(frozen=True)
class ChannelParams:
    eta: float
    gamma_pd: float
    area_r: float
    theta_half: float
    fov: float
    ts: float = 1.0
    kappa: float = 1.5

    def __post_init__(self):
        for name in ("eta", "gamma_pd", "area_r", "theta_half", "fov", "ts", "kappa"):
            verify_positive(getattr(self, name), name)
        if not self.theta_half < math.pi / 2:
            raise Errors.InvalidInputError("theta_half must lie in (0, π/2)")
        if not self.fov <= math.pi / 2:
            raise Errors.InvalidInputError("fov must lie in (0, π/2]")

    @classmethod
    def from_degrees(cls, eta, gamma_pd, area_r, theta_half_deg, fov_deg, ts=1.0, kappa=1.5):
        return cls(
            eta=eta,
            gamma_pd=gamma_pd,
            area_r=area_r,
            theta_half=math.radians(theta_half_deg),
            fov=math.radians(fov_deg),
            ts=ts,
            kappa=kappa,
        )

    @property
    def lambertian_order(self) -> float:
        return -math.log(2.0) / math.log(math.cos(self.theta_half))

    @property
    def concentrator_gain(self) -> float:
        return self.kappa ** 2 / math.sin(self.fov) ** 2


# Photometric values of the reference indoor setup.
REFERENCE_PARAMS = ChannelParams.from_degrees(
    eta=0.44, gamma_pd=0.54, area_r=1e-4, theta_half_deg=60.0, fov_deg=60.0, ts=1.0, kappa=1.5
)


@dataclass(frozen=True)
class LinkGeometry:
    tx_pos: tuple
    rx_pos: tuple
    tx_normal: tuple = LED_FACING_DOWN
    rx_normal: tuple = PD_FACING_UP


def _incidence_angle(geom: LinkGeometry):
    """
    Returns (d, cos φ, cos ψ) for the link after validating the geometry.
    """
    tx = np.asarray(geom.tx_pos, dtype=float)
    rx = np.asarray(geom.rx_pos, dtype=float)
    if tx.shape != (3,) or rx.shape != (3,):
        raise Errors.GeometryError("tx_pos and rx_pos must be 3-vectors")
    tx_normal = verify_unit_vector(geom.tx_normal, "tx_normal")
    rx_normal = verify_unit_vector(geom.rx_normal, "rx_normal")

    offset = rx - tx
    d = float(np.linalg.norm(offset))
    if d == 0.0:
        raise Errors.GeometryError("LED and photodiode positions coincide (d = 0)")
    cos_phi = float(np.dot(tx_normal, offset) / d)
    cos_psi = float(np.dot(rx_normal, -offset) / d)
    return d, cos_phi, cos_psi


def los_gain(geom: LinkGeometry, params: ChannelParams) -> float:
    """
    Computes the LoS gain of one LED → photodiode link.

    :param geom: Positions and boresight normals of the link ends.
    :param params: Photometric parameters of the LED and receiver.
    :return: The end-to-end gain; exactly 0 outside the receiver field of view or behind the LED.
    :raises GeometryError: When d = 0 or a normal does not have unit norm.
    """
    d, cos_phi, cos_psi = _incidence_angle(geom)
    psi = math.acos(min(1.0, max(-1.0, cos_psi)))
    if psi > params.fov or cos_phi <= 0.0:
        return 0.0

    order = params.lambertian_order
    emission = (order + 1.0) / (2.0 * math.pi) * cos_phi ** order
    return (
        params.eta * params.gamma_pd * params.area_r / d ** 2
        * emission
        * params.ts
        * params.concentrator_gain
        * cos_psi
    )


def build_channel_matrix(
    led_positions: Sequence,
    user_positions: Sequence,
    params: ChannelParams,
    tx_normal=LED_FACING_DOWN,
    rx_normal=PD_FACING_UP,
) -> np.ndarray:
    """
    Builds the K×N_T channel matrix, entry (k, n) being the gain from LED n to user k.

    :param led_positions: N_T positions in metres.
    :param user_positions: K positions in metres.
    :param params: Photometric parameters shared by every link.
    :param tx_normal: LED boresight, straight down unless overridden.
    :param rx_normal: Photodiode boresight, straight up unless overridden.
    :return: Nonnegative K×N_T matrix.
    """
    if len(led_positions) < 1 or len(user_positions) < 1:
        raise Errors.InvalidInputError("At least one LED and one user are required")

    H = np.zeros((len(user_positions), len(led_positions)))
    for k, rx in enumerate(user_positions):
        for n, tx in enumerate(led_positions):
            geom = LinkGeometry(tuple(tx), tuple(rx), tuple(tx_normal), tuple(rx_normal))
            H[k, n] = los_gain(geom, params)
    if not np.any(H):
        logger.warning("Every link is outside the receiver field of view; the channel matrix is all zero")
    return H


def channel_summary(H, led_positions, user_positions):
    """
    Summarises a channel matrix per user for the `channel-dump` report.

    :return: A list of dictionaries with the user index and position, the strongest LED, its gain and the row L1 norm.
    """
    H = np.asarray(H, dtype=float)
    rows = []
    for k, position in enumerate(user_positions):
        best = int(np.argmax(H[k]))
        rows.append({
            "user": k + 1,
            "position": tuple(float(x) for x in position),
            "strongest_led": best + 1 if H[k, best] > 0 else None,
            "strongest_led_position": tuple(float(x) for x in led_positions[best]),
            "strongest_gain": float(H[k, best]),
            "row_l1": float(np.abs(H[k]).sum()),
        })
    return rows


def verify_inside_room(positions, dims, label: str):
    """
    Checks that positions lie in a room of the given (length, width, height), centred at the origin in x/y
    with the floor at z = 0.

    :raises GeometryError: For the first position outside the room.
    """
    length, width, height = (float(v) for v in dims)
    for index, position in enumerate(positions):
        x, y, z = (float(v) for v in position)
        if abs(x) > length / 2 or abs(y) > width / 2 or not 0.0 <= z <= height:
            raise Errors.GeometryError(
                f"{label}[{index}] at {tuple(position)} lies outside the {length}×{width}×{height} m room",
                {"path": f"{label}[{index}]"},
            )
