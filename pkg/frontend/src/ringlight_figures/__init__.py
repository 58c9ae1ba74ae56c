"""Figure rendering for ringlight artifacts (secondary component)."""

from .reader import ArtifactError, ProvenanceError, load
from .renderer import (FigureRequest, build_named_figure,
                       render_density_figure, render_scan_figure,
                       render_spectrogram_figure)

__all__ = [
    "ArtifactError", "ProvenanceError", "load", "FigureRequest",
    "build_named_figure", "render_density_figure", "render_scan_figure",
    "render_spectrogram_figure",
]
