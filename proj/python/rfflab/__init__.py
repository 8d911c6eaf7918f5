"""Hammerstein RF fingerprinting of QPSK-OFDM transmitters."""

import json

from ._core import *  # noqa: F401,F403
from ._core import default_config_json
from ._core import run_frame_sample as _run_frame_sample
from ._core import run_sweep as _run_sweep
from ._core import simulate_frame as _simulate_frame

__version__ = "0.1.0"


def default_config():
    """The default experiment configuration as a dict."""
    return json.loads(default_config_json())


def _dump(config):
    if config is None:
        return ""
    if isinstance(config, str):
        return config
    return json.dumps(config)


def simulate_frame(config=None, device=0, ebn0_db=float("inf"), p=1, trial=0, frame=0):
    return _simulate_frame(_dump(config), device, ebn0_db, p, trial, frame)


def run_frame_sample(config=None, device=0, ebn0_db=float("inf"), p=1, trial=0, frame=0):
    """(payload_record, pilot_record) for one simulated frame."""
    return _run_frame_sample(_dump(config), device, ebn0_db, p, trial, frame)


def run_sweep(config=None, out_dir=""):
    """Monte Carlo sweep; returns {"rows", "csv", "seconds"}."""
    return _run_sweep(_dump(config), str(out_dir))
