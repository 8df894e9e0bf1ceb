"""Shared fixtures; the desk-scale training run is expensive and reused."""

import numpy as np
import pytest

from elastimesh.meshcore import uniform_comp_grid
from elastimesh.presets import make_domain
from elastimesh.training import TrainConfig, apply_profile, generate_mesh, train


@pytest.fixture(scope="session")
def annulus_desk_run():
    """Quarter-annulus desk-profile training: model, weights, history, mesh."""
    domain = make_domain("quarter_annulus")
    cfg = apply_profile(TrainConfig(ni=21, nj=21, seed=0), "desk")
    model, weights, history = train(domain, cfg)
    mesh = generate_mesh(model, uniform_comp_grid(cfg.ni, cfg.nj))
    return {
        "domain": domain,
        "cfg": cfg,
        "model": model,
        "weights": weights,
        "history": history,
        "mesh": mesh,
    }


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
