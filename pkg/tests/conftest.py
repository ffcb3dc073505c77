import sys
from dataclasses import replace
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from gravprobe.config import resolve_config  # noqa: E402
from gravprobe.core import CavityAxis  # noqa: E402


@pytest.fixture(scope="session")
def fig3():
    return resolve_config(preset="fig3").params


@pytest.fixture(scope="session")
def fig4():
    return resolve_config(preset="fig4").params


def dark(params):
    """Same system with both lasers switched off."""
    return replace(
        params,
        cav_x=replace(params.cav_x, drive=0.0, power=None),
        cav_y=replace(params.cav_y, drive=0.0, power=None),
    )


def with_cavity(params, axis, **changes):
    cav = replace(params.cav(axis), **changes)
    return replace(params, **{f"cav_{axis}": cav})


__all__ = ["dark", "with_cavity", "CavityAxis"]
