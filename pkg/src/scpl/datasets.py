"""Accessors for the data files bundled with the package."""

from __future__ import annotations

from importlib import resources

from .formats import parse_configuration, parse_product_line
from .model import Configuration, FeatureModel, ImpMapping, StateChart


def _read(name: str) -> str:
    ref = resources.files("scpl.data.mobile_phone").joinpath(name)
    return ref.read_text(encoding="utf-8")


def mobile_phone() -> tuple[FeatureModel, StateChart, ImpMapping]:
    """The bundled mobile-phone product line."""
    return parse_product_line(_read("mp.pl.json"))


def mobile_phone_no_poly() -> Configuration:
    """Configuration deselecting polyphonic sounds and the message alarm."""
    return parse_configuration(_read("mp-no-poly.conf.json"))


def mobile_phone_full() -> Configuration:
    """Configuration selecting every feature."""
    return parse_configuration(_read("mp-full.conf.json"))
