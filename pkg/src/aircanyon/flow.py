"""Rule-based flow characterization of a street canyon.

The rules are categorical: a regime from the aspect ratio, then mechanically
and thermally induced vortices from the cross-canyon wind and bottom heating.
Vortex rotation is reported in a cross-section viewed with the wind crossing
from left to right, where the main canyon vortex turns clockwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from .mediator import OuppStreetCanyon, classify_scfus, with_sides
from .ontology import (AmbientWindConditions, Flow, FlowRegime, Level,
                       MeteorologicalConditions, Rotation, Side, Vortex,
                       VortexIntensity, VortexOrigin, VortexShape)

ALONG_CANYON_TOL = 1e-9
ADVISORY_SOURCE = "Baik & Kim (2002)"
ADVISORY_TEXT = "cycle path on upwind side"


@dataclass(frozen=True)
class FlowRuleConfig:
    isolated_max: float = 0.30
    wake_max: float = 0.70
    two_vortex_min: float = 1.5
    strong_intensity_min: float = 5.0
    thermal_delta_min: float = 2.0
    perpendicular_min: float = 60.0

    def __post_init__(self):
        for name, v in vars(self).items():
            if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
                raise ValueError(f"{name} must be positive, got {v!r}")
        if not self.isolated_max < self.wake_max:
            raise ValueError("isolated_max must be below wake_max")
        if self.perpendicular_min > 90:
            raise ValueError("perpendicular_min is a relative angle in [0, 90]")


@dataclass(frozen=True)
class WindContext:
    relative_angle: float
    upwind_side: Optional[Side] = None
    downwind_side: Optional[Side] = None

    @property
    def cross_wind(self) -> bool:
        return self.upwind_side is not None


def relative_wind_angle(wind: AmbientWindConditions, street_orientation: float) -> float:
    x = abs(wind.direction_from - street_orientation) % 180.0
    return min(x, 180.0 - x)


def assign_sides(canyon: OuppStreetCanyon, wind: AmbientWindConditions) -> WindContext:
    """Resolve which building row faces the incoming wind.

    ``buildings_1`` lies on the positive-normal side of the street axis, so it
    is upwind when the normal points toward where the wind comes from.
    """
    angle = relative_wind_angle(wind, canyon.axis.orientation_deg)
    if angle <= ALONG_CANYON_TOL or wind.speed == 0:
        return WindContext(angle)
    r = math.radians(wind.direction_from)
    nx, ny = canyon.axis.normal
    if nx * math.sin(r) + ny * math.cos(r) > 0:
        return WindContext(angle, Side.BUILDINGS_1, Side.BUILDINGS_2)
    return WindContext(angle, Side.BUILDINGS_2, Side.BUILDINGS_1)


def orient_canyon(canyon: OuppStreetCanyon, ctx: WindContext) -> OuppStreetCanyon:
    """Copy of ``canyon`` with windward (downwind row) and leeward (upwind row) set."""
    return with_sides(canyon, ctx.downwind_side, ctx.upwind_side)


def classify_flow_regime(hw_ratio: float, cfg: FlowRuleConfig = FlowRuleConfig()) -> FlowRegime:
    if hw_ratio < cfg.isolated_max:
        return FlowRegime.ISOLATED_ROUGHNESS
    if hw_ratio < cfg.wake_max:
        return FlowRegime.WAKE_INTERFERENCE
    return FlowRegime.SKIMMING


def derive_vortices(canyon: OuppStreetCanyon, met: MeteorologicalConditions,
                    cfg: FlowRuleConfig = FlowRuleConfig()) -> Flow:
    hw = canyon.in_aq.height_to_width_ratio
    regime = classify_flow_regime(hw, cfg)
    ctx = assign_sides(canyon, met.wind)
    if regime is not FlowRegime.SKIMMING or not ctx.cross_wind or ctx.relative_angle < cfg.perpendicular_min:
        return Flow(regime=regime)

    intensity = (VortexIntensity.STRONG if met.wind.speed >= cfg.strong_intensity_min
                 else VortexIntensity.WEAK)
    stacked = hw >= cfg.two_vortex_min
    vortices = [Vortex(intensity=intensity, rotation_direction=Rotation.CLOCKWISE,
                       location=Level.BUILDING, origin=VortexOrigin.MECHANICAL,
                       shape=VortexShape.ROLL)]
    if stacked:
        vortices.append(Vortex(intensity=intensity, rotation_direction=Rotation.COUNTER_CLOCKWISE,
                               location=Level.STREET, origin=VortexOrigin.MECHANICAL,
                               shape=VortexShape.ROLL))
    th = met.thermal
    if th is not None and th.t_street_bottom is not None and th.t_air is not None:
        if th.t_street_bottom - th.t_air >= cfg.thermal_delta_min:
            lowest = vortices[-1].rotation_direction
            turn = Rotation.CLOCKWISE if lowest is Rotation.COUNTER_CLOCKWISE else Rotation.COUNTER_CLOCKWISE
            vortices.append(Vortex(intensity=VortexIntensity.WEAK, rotation_direction=turn,
                                   location=Level.STREET, origin=VortexOrigin.THERMAL))
    return Flow(regime=regime, vortices=tuple(vortices))


@dataclass(frozen=True)
class Advisory:
    """Placement advice for an SCFUS canyon, or the reason it is withheld."""

    reason: Optional[str] = None
    lower_region_hotspot: Optional[Side] = None
    upper_region_hotspot: Optional[Side] = None
    recommended_side: Optional[Side] = None
    recommendation: Optional[str] = None
    source: Optional[str] = None

    @property
    def available(self) -> bool:
        return self.reason is None


def dispersion_advisory(canyon: OuppStreetCanyon, ctx: WindContext) -> Advisory:
    if not classify_scfus(canyon):
        return Advisory(reason="not-SCFUS")
    if not ctx.cross_wind:
        return Advisory(reason="no-cross-wind")
    return Advisory(
        lower_region_hotspot=ctx.downwind_side,
        upper_region_hotspot=ctx.upwind_side,
        recommended_side=ctx.upwind_side,
        recommendation=ADVISORY_TEXT,
        source=ADVISORY_SOURCE,
    )
