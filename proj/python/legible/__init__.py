"""Observer models for legible robot motion, learned from labeled trajectories."""

import json as _json
import os as _os

from . import _core
from ._core import (
    LegibleError,
    arc_length,
    compute_scores,
    project_viewpoint,
    resample_uniform,
    scores_to_distribution,
)

METRICS = ("dragan", "nikolaidis", "effdist", "fastapp")


class Config:
    """Experiment configuration; keyword overrides are merged onto a preset."""

    def __init__(self, scale="desk", **overrides):
        doc = {"scale": scale}
        doc.update(overrides)
        if "output_dir" in doc:
            doc["output_dir"] = _os.fspath(doc["output_dir"])
        self._doc = _json.loads(_core.resolve_config(_json.dumps(doc)))

    @classmethod
    def from_file(cls, path):
        with open(path) as f:
            doc = _json.load(f)
        return cls(**doc)

    def to_dict(self):
        return _json.loads(self.dump())

    def dump(self):
        return _json.dumps(self._doc)

    @property
    def hash(self):
        return _core.config_hash(self.dump())

    @property
    def output_dir(self):
        return self._doc["output_dir"]

    def __getitem__(self, key):
        return self._doc[key]


def gen(config):
    return _json.loads(_core.gen(config.dump()))


def label(config):
    _core.label(config.dump())


def train_slotv(config, metric="dragan", split="training", repeat=0):
    return _core.train_slotv(config.dump(), split, metric, repeat)


def train_trex(config, metric="dragan", split="training", repeat=0):
    return _core.train_trex(config.dump(), split, metric, repeat)


def evaluate(model, labeled, environments, metric="dragan"):
    return _json.loads(_core.evaluate(model, labeled, environments, metric))


def table(config):
    keys = ("framework", "metric", "split", "mean", "sd", "n")
    return [dict(zip(keys, row)) for row in _core.table(config.dump())]


def curve(config):
    keys = ("framework", "updates", "examples_seen", "val_accuracy", "sd", "n")
    return [dict(zip(keys, row)) for row in _core.curve(config.dump())]


__all__ = [
    "METRICS",
    "Config",
    "LegibleError",
    "arc_length",
    "compute_scores",
    "curve",
    "evaluate",
    "gen",
    "label",
    "project_viewpoint",
    "resample_uniform",
    "scores_to_distribution",
    "table",
    "train_slotv",
    "train_trex",
]
