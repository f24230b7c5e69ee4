import numpy as np
import pytest

from gasseg import corpus, features


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def tiny_spec():
    return corpus.SyntheticSpec(num_utterances=4, segments_per_utterance=(3, 5),
                                segment_duration_ms=(80.0, 160.0), seed=99)


@pytest.fixture(scope="session")
def tiny_corpus(tiny_spec):
    return corpus.synth_corpus(tiny_spec)


@pytest.fixture(scope="session")
def tiny_features(tiny_corpus):
    out = {}
    for k, (wave, annot) in enumerate(tiny_corpus):
        out[f"u{k}"] = features.cmvn(features.mfcc39(wave))
    return out
