"""Shared fixtures: small synthetic corpora reused across test modules.

Session-scoped because corpus generation is the slowest part of the suite;
everything derived from these is pure, so sharing is safe.
"""
import pytest

from bcikit.core import Task
from bcikit.io import save_corpus
from bcikit.synth import SynthConfig, gen_corpus


@pytest.fixture(scope="session")
def ssvep_corpus():
    """Three runs of flicker trials only (30 trials total)."""
    return gen_corpus(SynthConfig(seed=7), tasks=(Task.SSVEP,), runs=3)


@pytest.fixture(scope="session")
def motor_corpus():
    """Three runs of motor imagery trials only (30 trials total)."""
    return gen_corpus(SynthConfig(seed=7), tasks=(Task.MOTOR_IMAGERY,), runs=3)


@pytest.fixture(scope="session")
def ssvep_corpus_dir(ssvep_corpus, tmp_path_factory):
    """The ssvep corpus saved to disk, for CLI round trips."""
    out = tmp_path_factory.mktemp("corpora") / "ssvep3"
    save_corpus(ssvep_corpus, out, meta={"seed": 7})
    return out
