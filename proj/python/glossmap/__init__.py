"""Light-map statistics, Fresnel optics and gloss stimulus rendering."""

from ._glossmap import (
    DomainError,
    IoError,
    NumericError,
    blur,
    coverage,
    fresnel,
    fresnel_curve,
    linear_fit,
    load_map,
    metrics,
    normal_incidence,
    order_powers,
    render,
    save_map,
    synth,
    tone_map,
)

__all__ = [
    "DomainError",
    "IoError",
    "NumericError",
    "blur",
    "coverage",
    "fresnel",
    "fresnel_curve",
    "linear_fit",
    "load_map",
    "metrics",
    "normal_incidence",
    "order_powers",
    "render",
    "save_map",
    "synth",
    "tone_map",
]
