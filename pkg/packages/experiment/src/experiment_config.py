"""
Experiment configuration files.

A configuration is a UTF-8 JSON document describing the room, the modulation, the A/σ sweep, the methods to
run and their solver settings. `load_config` validates it against `ExperimentConfigModel`, fills the defaults
and returns an immutable `ExperimentConfig`.
"""

import dataclasses
import json
import logging
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from packages.channel.src.channel import ChannelParams, LED_FACING_DOWN, PD_FACING_UP, build_channel_matrix, verify_inside_room
from packages.constellation.src.constellation import shared_constellations
from packages.firefly.src.firefly import FaConfig
from packages.rate_engine.src.mixture import GridPolicy, NoiseModel
from packages.rate_engine.src.rates import PenaltyWeights
from packages.schema.src.schema import verify_object_against_schema
from packages.utils.src.errors import Errors
from packages.utils.src.data_utils import verify_unit_vector
from packages.zf_ao.src.ao import AoConfig
from packages.zf_ao.src.ccp import CcpConfig
from packages.zf_ao.src.pmf_solver import PmfSolverConfig

logger = logging.getLogger(__name__)

METHODS = ("fa", "zf_ao", "uniform_baseline_fa", "uniform_baseline_zf")
DB_CONVENTIONS = ("amplitude", "power")
PEAK_POLICIES = ("sweep_peak", "sweep_noise")

DEFAULT_ROOM = (5.0, 5.0, 3.0)
DEFAULT_PARAMS = {
    "eta": 0.44,
    "gamma_pd": 0.54,
    "area_r": 1e-4,
    "theta_half_deg": 60.0,
    "fov_deg": 60.0,
    "ts": 1.0,
    "kappa": 1.5,
}


def ratio_from_db(db: float, convention: str = "amplitude") -> float:
    """
    Converts an A/σ point in dB to the linear ratio: 10^(dB/20) for the amplitude convention,
    10^(dB/10) for the power convention.
    """
    if convention == "amplitude":
        return 10.0 ** (db / 20.0)
    if convention == "power":
        return 10.0 ** (db / 10.0)
    raise Errors.InvalidInputError(f"Unknown dB convention {convention!r}, expected one of {DB_CONVENTIONS}")


@dataclass(frozen=True, eq=False)
class ExperimentConfig:
    led_positions: np.ndarray
    user_positions: np.ndarray
    params: ChannelParams
    order: int
    a_over_sigma_db: Tuple[float, ...]
    methods: Tuple[str, ...] = ("zf_ao",)
    db_convention: str = "amplitude"
    peak_policy: str = "sweep_peak"
    room_dims: Tuple[float, float, float] = DEFAULT_ROOM
    led_normal: Tuple[float, float, float] = LED_FACING_DOWN
    pd_normal: Tuple[float, float, float] = PD_FACING_UP
    fa: FaConfig = FaConfig()
    ao: AoConfig = AoConfig()
    grid_policy: GridPolicy = GridPolicy()
    component_cap: Optional[int] = None
    seed: int = 0
    output_dir: str = "results"
    name: str = "experiment"

    def __post_init__(self):
        if not self.a_over_sigma_db:
            raise Errors.InvalidInputError("At least one A/σ point is required")
        unknown = [m for m in self.methods if m not in METHODS]
        if not self.methods or unknown:
            raise Errors.InvalidInputError(f"Unknown method(s) {unknown}, expected a selection of {METHODS}")
        if self.db_convention not in DB_CONVENTIONS:
            raise Errors.InvalidInputError(f"Unknown dB convention {self.db_convention!r}")
        if self.peak_policy not in PEAK_POLICIES:
            raise Errors.InvalidInputError(f"Unknown peak policy {self.peak_policy!r}")
        if self.order < 2:
            raise Errors.InvalidInputError(f"Modulation order must be >= 2, got {self.order}")

    @property
    def users(self) -> int:
        return len(self.user_positions)

    def with_overrides(self, **changes) -> "ExperimentConfig":
        """Copy with the given fields replaced; `None` values are ignored."""
        return dataclasses.replace(self, **{k: v for k, v in changes.items() if v is not None})

    def channel(self) -> np.ndarray:
        return build_channel_matrix(self.led_positions, self.user_positions, self.params,
                                    self.led_normal, self.pd_normal)

    def operating_point(self, db: float):
        """
        :return: (constellations, noise model) for one A/σ point. With `sweep_peak` σ = 1 and A carries the
                 ratio; with `sweep_noise` A = 1 and σ = 1/ratio.
        """
        ratio = ratio_from_db(db, self.db_convention)
        if self.peak_policy == "sweep_peak":
            peak, sigma = ratio, 1.0
        else:
            peak, sigma = 1.0, 1.0 / ratio
        return shared_constellations(self.users, self.order, peak), NoiseModel(sigma)

    def runtime_overrides(self) -> dict:
        overrides = {
            "points_per_sigma": self.grid_policy.points_per_sigma,
            "grid_margin_sigmas": self.grid_policy.margin_sigmas,
        }
        if self.component_cap is not None:
            overrides["component_cap"] = self.component_cap
        return overrides


def _methods(raw) -> Tuple[str, ...]:
    if raw is None:
        return ("zf_ao",)
    return (raw,) if isinstance(raw, str) else tuple(raw)


def _verify_room(room: dict, dims):
    for key in ("leds", "users"):
        try:
            verify_inside_room(room[key], dims, f"room.{key}")
        except Errors.GeometryError as e:
            raise Errors.ConfigValidationError((e.options or {}).get("path", f"room.{key}"), str(e))


def _fa_config(raw: dict, seed: int) -> FaConfig:
    raw = dict(raw)
    weights = PenaltyWeights(**raw.pop("penalty", {}))
    return FaConfig(penalty=weights, seed=seed, **raw)


def _ao_config(raw: dict) -> AoConfig:
    raw = dict(raw)
    pmf = PmfSolverConfig(**raw.pop("pmf", {}))
    ccp = CcpConfig(**raw.pop("ccp", {}))
    return AoConfig(pmf=pmf, ccp=ccp, **raw)


def config_from_dict(raw: dict) -> ExperimentConfig:
    """
    Builds an `ExperimentConfig` from an already parsed document.

    :raises ConfigValidationError: If the document violates the schema or a position lies outside the room.
    """
    verify_object_against_schema(raw)
    room = raw["room"]
    dims = tuple(float(v) for v in room.get("dimensions", DEFAULT_ROOM))
    _verify_room(room, dims)

    params = {**DEFAULT_PARAMS, **room.get("params", {})}
    noise = raw["noise"]
    modulation = raw["modulation"]
    quadrature = dict(raw.get("quadrature", {}))
    seed = int(raw.get("seed", 0))
    try:
        cfg = ExperimentConfig(
            led_positions=np.array(room["leds"], dtype=float),
            user_positions=np.array(room["users"], dtype=float),
            params=ChannelParams.from_degrees(**params),
            order=int(modulation["order"]),
            a_over_sigma_db=tuple(float(v) for v in noise["a_over_sigma_db"]),
            methods=_methods(raw.get("method")),
            db_convention=noise.get("db_convention", "amplitude"),
            peak_policy=modulation.get("peak_policy", "sweep_peak"),
            room_dims=dims,
            led_normal=tuple(room.get("led_normal", LED_FACING_DOWN)),
            pd_normal=tuple(room.get("pd_normal", PD_FACING_UP)),
            fa=_fa_config(raw.get("firefly", {}), seed),
            ao=_ao_config(raw.get("ao", {})),
            grid_policy=GridPolicy(
                points_per_sigma=int(quadrature.get("points_per_sigma", 16)),
                margin_sigmas=float(quadrature.get("margin_sigmas", 8.0)),
            ),
            component_cap=quadrature.get("component_cap"),
            seed=seed,
            output_dir=raw.get("output_dir", "results"),
            name=raw.get("name", "experiment"),
        )
    except Errors.InvalidInputError as e:
        raise Errors.ConfigValidationError("", str(e))
    for key, normal in (("room.led_normal", cfg.led_normal), ("room.pd_normal", cfg.pd_normal)):
        try:
            verify_unit_vector(normal, key)
        except Errors.GeometryError as e:
            raise Errors.ConfigValidationError(key, str(e))
    return cfg


def load_config(path: str) -> ExperimentConfig:
    """
    Reads, validates and completes an experiment configuration file.

    :param path: Path to a UTF-8 JSON file.
    :return: The validated configuration with defaults filled.
    :raises ConfigValidationError: On a JSON parse error or a schema violation; the error names the field path.
    """
    try:
        with open(path, encoding="utf-8") as f:
            raw = json.load(f)
    except json.JSONDecodeError as e:
        raise Errors.ConfigValidationError("", f"{path} is not valid JSON: {e.msg} (line {e.lineno}, column {e.colno})")
    cfg = config_from_dict(raw)
    logger.info(
        "Loaded %s: %d LEDs, %d users, %d-PAM, %d A/σ points, methods %s",
        path, len(cfg.led_positions), cfg.users, cfg.order, len(cfg.a_over_sigma_db), ",".join(cfg.methods),
    )
    return cfg
