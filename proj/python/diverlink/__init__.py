"""Diver detection, visual-servo following and gesture-instruction decoding."""

import csv
import io
import json

from . import _core
from ._core import ArgumentError, ConfigError, IoError, StateError, dtft

__version__ = _core.__version__

__all__ = [
    "ArgumentError", "ConfigError", "IoError", "StateError",
    "band_score", "canonical_tokens", "decode", "default_mapping", "dtft", "follow",
    "recognize", "render_diver_sequence", "render_gesture_sequence", "run_experiment", "track",
]


def _dump(obj):
    return "" if obj is None else json.dumps(obj)


def band_score(series, config=None):
    return _core.band_score(list(series), _dump(config))


def render_diver_sequence(spec=None):
    """Returns (frames[N, H, W] uint8, truth dict)."""
    frames, truth = _core.render_diver_sequence(_dump(spec or {}))
    return frames, json.loads(truth)


def render_gesture_sequence(spec):
    """Returns (frames[N, H, W, 3] uint8, truth dict)."""
    frames, truth = _core.render_gesture_sequence(_dump(spec))
    return frames, json.loads(truth)


def track(frames, config=None, truth=None, tol_windows=1):
    return json.loads(_core.track(frames, _dump(config), _dump(truth), tol_windows))


def recognize(frames, gesture_config=None):
    return json.loads(_core.recognize(frames, _dump(gesture_config)))


def decode(tokens, mapping=None):
    return json.loads(_core.decode(json.dumps(list(tokens)), _dump(mapping)))


def canonical_tokens(program, mapping=None, hold=20, gap=10):
    return json.loads(_core.canonical_tokens(json.dumps(list(program)), _dump(mapping), hold, gap))


def default_mapping():
    return json.loads(_core.default_mapping())


def follow(ox, oy, gains=None, seconds=10.0, fps=10.0):
    """Closed-loop follow simulation; returns one dict per control step."""
    text = _core.follow(ox, oy, _dump(gains), seconds, fps)
    return [{k: float(v) for k, v in row.items()} for row in csv.DictReader(io.StringIO(text))]


def run_experiment(spec_path, out_root="", seed=None):
    return json.loads(_core.run_experiment(str(spec_path), str(out_root), seed))
