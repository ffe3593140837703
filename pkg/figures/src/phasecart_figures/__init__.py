"""Figures rendered from phasecart CSV outputs."""

from .render import (
    EmptyDataError,
    FigureError,
    FigureSpec,
    KINDS,
    MissingColumnError,
    render,
)

__all__ = [
    "EmptyDataError",
    "FigureError",
    "FigureSpec",
    "KINDS",
    "MissingColumnError",
    "render",
]
