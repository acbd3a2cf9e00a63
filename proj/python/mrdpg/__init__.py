"""Multilayer random dot product graphs: tensor estimation and online change point detection."""

import json

from ._core import (
    ConfigError,
    IoError,
    NumericError,
    band_size_closed_form,
    bands,
    default_bandwidth,
    fixed_latent_threshold,
    frob_scan,
    gen_sbm_prob,
    grid_size,
    hosvd_project,
    hosvd_rank1,
    hpca,
    kernel_threshold,
    matricize,
    mode_multiply,
    sample_adjacency,
    thpca,
)
from . import _core


def trial_stream(config, trial=0):
    """Adjacency tensors A(1..T) of one trial, as numpy arrays."""
    return _core._trial_stream(json.dumps(config), trial)


def detect(config, stream):
    """Run the detector described by `config` over a list of arrays; returns the result record."""
    return json.loads(_core._detect(json.dumps(config), list(stream)))


def run_experiment(config, jobs=1):
    """Calibrate, detect on every trial and summarise."""
    return json.loads(_core._run_experiment(json.dumps(config), jobs))
