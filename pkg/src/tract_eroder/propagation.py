"""Set-back distance from the CBRS boundary signal limit.

A CBSD transmitting at the allowed EIRP must not exceed the boundary limit
at the tract edge. The path loss needed to get there is converted to a
distance with the free-space model (distance in km, frequency in MHz).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

FSPL_CONSTANT_DB = 32.44

DEFAULT_EIRP_DBM = 30.0
DEFAULT_BOUNDARY_LIMIT_DBM = -80.0
DEFAULT_FREQ_MHZ = 3600.0

BUILDING_LOSS_DB = {
    "outdoor": 0.0,
    "indoor_residential": 10.0,
    "indoor_commercial": 20.0,
}
DEPLOYMENT_CLASSES = tuple(BUILDING_LOSS_DB)


class SetbackError(ValueError):
    """Raised when a deployment spec cannot yield a set-back distance."""


@dataclass(frozen=True)
class SetbackSpec:
    deployment_class: str = "outdoor"
    eirp_dbm: float = DEFAULT_EIRP_DBM
    boundary_limit_dbm: float = DEFAULT_BOUNDARY_LIMIT_DBM
    building_loss_db: float = 0.0
    freq_mhz: float = DEFAULT_FREQ_MHZ
    rx_gain_dbi: float = 0.0

    def __post_init__(self):
        if not self.freq_mhz > 0:
            raise SetbackError(f"frequency must be positive, got {self.freq_mhz} MHz")
        if self.building_loss_db < 0:
            raise SetbackError(f"building loss must be >= 0 dB, got {self.building_loss_db}")

    @classmethod
    def for_class(cls, deployment_class: str, **overrides) -> "SetbackSpec":
        """Spec for one of the named deployment classes with optional overrides."""
        key = deployment_class.replace("-", "_")
        if key not in BUILDING_LOSS_DB:
            raise SetbackError(
                f"unknown deployment class {deployment_class!r}; "
                f"expected one of {', '.join(DEPLOYMENT_CLASSES)}"
            )
        spec = cls(deployment_class=key, building_loss_db=BUILDING_LOSS_DB[key])
        return replace(spec, **overrides) if overrides else spec


def required_path_loss(spec: SetbackSpec) -> float:
    """Path loss in dB needed so the boundary sees at most the limit."""
    loss = spec.eirp_dbm - spec.boundary_limit_dbm - spec.building_loss_db + spec.rx_gain_dbi
    if loss <= 0:
        raise SetbackError(
            f"required path loss is {loss:g} dB; EIRP must exceed the boundary "
            "limit plus building loss for a set-back to exist"
        )
    return loss


def fspl_distance(path_loss_db: float, freq_mhz: float) -> float:
    """Distance in meters at which free-space loss equals ``path_loss_db``."""
    if path_loss_db <= 0:
        raise SetbackError(f"path loss must be positive, got {path_loss_db}")
    if freq_mhz <= 0:
        raise SetbackError(f"frequency must be positive, got {freq_mhz}")
    exponent = (path_loss_db - FSPL_CONSTANT_DB - 20.0 * math.log10(freq_mhz)) / 20.0
    return 1000.0 * 10.0**exponent


def fspl_db(distance_m: float, freq_mhz: float) -> float:
    """Free-space path loss in dB; inverse of :func:`fspl_distance`."""
    return 20.0 * math.log10(distance_m / 1000.0) + 20.0 * math.log10(freq_mhz) + FSPL_CONSTANT_DB


def setback_for_deployment(deployment: str | SetbackSpec) -> float:
    """Set-back distance in meters for a class name or a custom spec."""
    spec = deployment if isinstance(deployment, SetbackSpec) else SetbackSpec.for_class(deployment)
    return fspl_distance(required_path_loss(spec), spec.freq_mhz)
