"""Inverse scattering transform solver for the Fokas-Lenells equation on the line."""

from .forward import PhysParams, forward_map
from .grids import ComplexSamples, Field, RealGrid, SpectralGrid
from .reconstruction import reconstruct_solution

__all__ = ["ComplexSamples", "Field", "PhysParams", "RealGrid", "SpectralGrid", "forward_map",
           "reconstruct_solution"]
