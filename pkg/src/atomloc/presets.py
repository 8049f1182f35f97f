"""Parameter sets that regenerate the published figure data."""
from __future__ import annotations

import math
from dataclasses import dataclass

from .model import ModelParams

HALF_PI = math.pi / 2


@dataclass(frozen=True)
class FigurePreset:
    id: str
    omega1: float
    omega2: float
    omega3: float
    gamma1: float
    gamma2_list: tuple
    phi_list: tuple
    deltas: dict  # phi -> detunings of the line plots
    highlight: float | None = None
    note: str = ""

    def params(self, phi: float, gamma2: float) -> ModelParams:
        return ModelParams(self.omega1, self.omega2, self.omega3, phi=phi,
                           gamma1=self.gamma1, gamma2=gamma2)

    def combos(self):
        """(phi, gamma2, detunings) in a fixed order."""
        for phi in self.phi_list:
            for g2 in self.gamma2_list:
                yield phi, g2, self.deltas[phi]

    def header(self) -> dict:
        return {"preset": self.id, "omega1": self.omega1, "omega2": self.omega2,
                "omega3": self.omega3, "gamma1": self.gamma1,
                "gamma2_list": list(self.gamma2_list), "phi_list": list(self.phi_list)}


_STD_DELTAS = {0.0: (0.0, 5.0, 13.0), HALF_PI: (0.0, 12.0, 16.0)}

PRESETS = {
    "fig3": FigurePreset("fig3", 30.0, 20.0, 20.0, 1.0, (0.0, 1.0, 10.0), (0.0, HALF_PI),
                         _STD_DELTAS, note="equal drives O2 = O3, gamma2 sweep"),
    "fig4": FigurePreset("fig4", 30.0, 20.0, 10.0, 1.0, (0.0, 1.0, 10.0), (0.0, HALF_PI),
                         _STD_DELTAS, note="unequal drives, same layout as fig3"),
    "fig5": FigurePreset("fig5", 30.0, 20.0, 20.0, 1.0, (10.0, 1e3, 1e4), (0.0, HALF_PI),
                         _STD_DELTAS, note="large gamma2; contour data is the target"),
    "fig6": FigurePreset("fig6", 20.0, 22.0, 25.0, 1.0, (1.0,), (0.0, HALF_PI, math.pi),
                         {0.0: (0.0, 5.0, 15.0), HALF_PI: (0.0, 5.0, 15.0),
                          math.pi: (0.0, 5.0, 15.0)},
                         highlight=5.0, note="sub-half-wavelength regime at delta = 5"),
}


def get_preset(name: str) -> FigurePreset:
    try:
        return PRESETS[name]
    except KeyError:
        raise KeyError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None


def phi_label(phi: float) -> str:
    for num, den, text in ((0, 1, "0"), (1, 2, "pi_2"), (1, 1, "pi"), (3, 2, "3pi_2"),
                           (-1, 2, "-pi_2"), (-1, 1, "-pi")):
        if abs(phi - num * math.pi / den) < 1e-12:
            return text
    return f"{phi:.6f}"
