"""Foutklassen van de engine.

Alles wat de engine bewust opgooit erft van ``Cat0Error``; de CLI vertaalt
dat naar exitcode 1. Uitkomsten als "geen uniek centrum" of "analyse
onvolledig" zijn waarden, geen excepties.
"""

from __future__ import annotations

from typing import Any, Sequence


class Cat0Error(Exception):
    """Basis voor alle fouten van de engine."""


class DomainError(Cat0Error, ValueError):
    """Punt of randpunt hoort niet bij de ruimte, of de ruimte is begrensd waar dat niet mag."""


class ArgumentError(Cat0Error, ValueError):
    """Argument buiten het toegestane bereik (t buiten [0,1], lege invoer, n < 1)."""


class CompositionError(Cat0Error):
    """Isometrieën die niet op elkaar aansluiten."""


class DegenerateVertexError(Cat0Error, ValueError):
    """Hoekpunt van een hoek valt samen met een van de benen."""


class NumericError(Cat0Error):
    """Numerieke limiet convergeert niet; draagt de laatste twee iteraties mee."""

    def __init__(self, message: str, iterates: Sequence[float] = ()):
        super().__init__(message)
        self.iterates = tuple(iterates)


class EmptySetError(Cat0Error):
    """Projectie op een lege convexe verzameling."""


class PreconditionError(Cat0Error):
    """Voorwaarde van een operatie is niet vervuld."""


class InvariantFailure(Cat0Error):
    """Een eigenschap die voor modelruimtes een stelling is, blijkt niet te gelden."""


class UnsupportedError(Cat0Error):
    """Constructie valt buiten de grammatica van convexe verzamelingen."""


class ScenarioError(Cat0Error):
    """Fout bij het inlezen van een scenario; ``context`` wijst de sleutel of de rand aan."""

    def __init__(self, message: str, context: Any = None):
        if context:
            message = f"{message} [{context}]"
        super().__init__(message)
        self.context = context


class UsageError(Cat0Error):
    """Onbekend commando of onbekende vlag."""
