"""Simulator and analysis toolkit for measurement-based quantum computation
in correlation space: matrix-product resource states, measurement protocols,
entanglement diagnostics, tomography, and an optical preparation model.
"""

__version__ = "0.1.0"

from . import analysis, measurement, noise_tomo, prep, protocols, qmath, wires

__all__ = [
    "analysis",
    "measurement",
    "noise_tomo",
    "prep",
    "protocols",
    "qmath",
    "wires",
]
