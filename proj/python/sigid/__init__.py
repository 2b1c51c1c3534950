"""Python bindings for the sigid wideband identification library."""

import json

from ._core import (
    Error,
    FormatError,
    UnsupportedMethodError,
    cp_detect,
    energy_detect,
    nfspem_detect,
    read_recording,
    scan_cyclic,
    simulate,
    welch_psd,
    write_recording,
)
from ._core import identify as _identify

__all__ = [
    "Error",
    "FormatError",
    "UnsupportedMethodError",
    "cp_detect",
    "energy_detect",
    "identify",
    "identify_json",
    "nfspem_detect",
    "read_recording",
    "scan_cyclic",
    "simulate",
    "welch_psd",
    "write_recording",
]


def identify_json(samples, sample_rate_hz, plan_path, **kwargs):
    """Report text exactly as the CLI writes it."""
    return _identify(samples, sample_rate_hz, plan_path, **kwargs)


def identify(samples, sample_rate_hz, plan_path, **kwargs):
    return json.loads(_identify(samples, sample_rate_hz, plan_path, **kwargs))
