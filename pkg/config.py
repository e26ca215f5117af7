from __future__ import annotations

import logging
import os
from typing import Optional

from dotenv import load_dotenv

# .env in de werkmap; bestaande omgevingsvariabelen gaan voor
load_dotenv(override=False)

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


def get_setting(key: str, default: Optional[str] = None) -> Optional[str]:
    """Haalt een instelling op uit de omgeving (of .env), anders de standaardwaarde."""
    val = os.getenv(key)
    if val is None or val == "":
        return default
    return val


def default_seed() -> int:
    raw = get_setting("CAT0_SEED", "0")
    try:
        return int(raw)
    except ValueError:
        raise ValueError(f"CAT0_SEED moet een geheel getal zijn, kreeg {raw!r}")


def setup_logging(level: Optional[str] = None) -> None:
    """Zet het logniveau van de engine via CAT0_LOG (standaard WARNING)."""
    name = (level or get_setting("CAT0_LOG", "WARNING")).upper()
    numeric = logging.getLevelName(name)
    if not isinstance(numeric, int):
        numeric = logging.WARNING
    logging.basicConfig(level=numeric, format=LOG_FORMAT, force=True)
    logging.getLogger("matplotlib").setLevel(max(numeric, logging.WARNING))
