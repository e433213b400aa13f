"""Scaling-law calculator for swapping electromagnets.

The control radius scales as r'/r = (m'/m)^(2/7) with the dipole
strength, because the achievable acceleration goes as m^2/r^7.  Payload
figures for the published large-scale scenarios are quoted verbatim (the
mass-scaling rule behind them is not derivable from the published
inputs) and clearly labelled as such.
"""

from __future__ import annotations

from dataclasses import dataclass

RADIUS_EXPONENT = 2.0 / 7.0


@dataclass(frozen=True)
class ScalingQuery:
    base_dipole: float      # A*m^2
    base_radius: float      # m
    base_payload: float     # kg
    new_dipole: float       # A*m^2

    def __post_init__(self):
        if min(self.base_dipole, self.base_radius,
               self.base_payload, self.new_dipole) <= 0.0:
            raise ValueError("all scaling query fields must be positive")


def scaled_radius(query: ScalingQuery) -> float:
    """r' = r * (m'/m)^(2/7)."""
    return query.base_radius * (query.new_dipole
                                / query.base_dipole) ** RADIUS_EXPONENT


def acceleration_scale(m: float, r: float) -> float:
    """Achievable-acceleration proportionality m^2 / r^7 (unit constant)."""
    if m <= 0.0 or r <= 0.0:
        raise ValueError("dipole strength and radius must be positive")
    return m * m / r**7


#: Published large-scale projections, quoted verbatim.  These payloads
#: cannot be recomputed from the published inputs; they are echoed as
#: provenance-labelled text only.
PAPER_SCENARIOS = (
    {"label": "paper-quoted — not independently derivable from published inputs",
     "name": "base system", "payload": "0.8 g actuator",
     "volume": "3.5 cm^3 control volume"},
    {"label": "paper-quoted — not independently derivable from published inputs",
     "name": "large-lift scenario", "payload": "26.2 kg",
     "volume": "(1.1 m)^3"},
    {"label": "paper-quoted — not independently derivable from published inputs",
     "name": "tokamak scenario", "payload": "3.8e5 kg",
     "volume": "(27.3 m)^3"},
)


def report_paper_scenarios(query: ScalingQuery | None = None) -> str:
    """Aligned text table of the quoted scenarios, plus the calculator's
    radius-ratio output when a query is supplied."""
    rows = [("scenario", "payload", "control volume", "provenance")]
    for s in PAPER_SCENARIOS:
        rows.append((s["name"], s["payload"], s["volume"], s["label"]))
    widths = [max(len(r[i]) for r in rows) for i in range(4)]
    lines = ["  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip()
             for r in rows]
    if query is not None:
        ratio = scaled_radius(query) / query.base_radius
        lines.append("")
        lines.append(f"dipole ratio {query.new_dipole / query.base_dipole:g} "
                     f"-> radius ratio {ratio:.6g} "
                     f"(r' = {scaled_radius(query):.6g} m)")
    return "\n".join(lines)
