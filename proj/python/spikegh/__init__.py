"""Nonnegative sparse spike-train restoration.

Thin python surface over the compiled core: distribution layer, collapsed
reversible-jump sampler, truncated-Gaussian baseline, convergence
diagnostics, and synthetic scenario generation. A pre-fitted amplitude
prior ships with the package; see ``load_default_fit``.
"""

from pathlib import Path

from spikegh._core import *  # noqa: F401,F403
from spikegh._core import __version__, load_gh_fit  # noqa: F401


def default_fit_path():
    """Path of the packaged maximum-likelihood amplitude-prior fit."""
    return str(Path(__file__).resolve().parent / "data" / "gh_fit_default.json")


def load_default_fit():
    """The packaged amplitude-prior fit, ready to pass to ``run_chain``."""
    return load_gh_fit(default_fit_path())
