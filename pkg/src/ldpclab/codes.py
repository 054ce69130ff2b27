"""Access to the parity-check matrices bundled with the package.

ccsds_128_64: the CCSDS (128,64) LDPC code, rebuilt from its block-circulant
definition (see scripts/gen_matrices.py).

reg64_3_6: a (3,6)-regular length-64 girth-6 code used as a structural
stand-in where some regular rate-1/2 length-64 code is needed.

code1: slot for the specific 64-bit PEG benchmark matrix some tests
target; it is not bundled.  Drop its alist at data/code1.alist (or point
LDPCLAB_CODE1_ALIST at it) and code1() will pick it up.
"""

from __future__ import annotations

import os
from importlib import resources
from pathlib import Path

from . import tanner
from .tanner import TannerGraph


def _load(name: str) -> TannerGraph:
    text = resources.files("ldpclab").joinpath(f"data/{name}").read_text()
    return tanner.parse_alist(text)


def ccsds_128_64() -> TannerGraph:
    return _load("ccsds_128_64.alist")


def reg64_3_6() -> TannerGraph:
    return _load("reg64_3_6.alist")


def code1_path() -> Path | None:
    env = os.environ.get("LDPCLAB_CODE1_ALIST")
    if env and Path(env).exists():
        return Path(env)
    bundled = resources.files("ldpclab").joinpath("data/code1.alist")
    try:
        if bundled.is_file():
            return Path(str(bundled))
    except OSError:
        pass
    return None


def code1() -> TannerGraph | None:
    path = code1_path()
    return tanner.load_alist(path) if path is not None else None
