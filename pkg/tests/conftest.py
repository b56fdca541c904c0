"""Shared fixtures: synthetic corpora and small models."""
import numpy as np
import pytest

from mvsd.corpus import Corpus, Sample
from mvsd.model import FusionModel, ModelConfig, ToyProvider


def make_sample(i, label, split="train", text=None, image_ref=None):
    return Sample(
        id=f"{split}-{i}",
        text=text if text is not None else f"word{i} filler",
        image_ref=image_ref if image_ref is not None else f"img{i}.jpg",
        label=label,
        split=split,
    )


def separable_corpus(n_train=200, n_val=40, n_test=40, seed=11):
    """Class-separable via text: each class draws from its own token pool,
    plus shared noise tokens; image refs carry no signal."""
    rng = np.random.default_rng(seed)
    pos_pool = [f"pos{i}" for i in range(10)]
    neg_pool = [f"neg{i}" for i in range(10)]
    noise = [f"noise{i}" for i in range(6)]
    samples = []

    def make(i, label, split):
        pool = pos_pool if label == 1 else neg_pool
        words = list(rng.choice(pool, size=4)) + list(rng.choice(noise, size=2))
        rng.shuffle(words)
        return Sample(
            id=f"{split}-{i}",
            text=" ".join(words),
            image_ref=f"img{rng.integers(0, 50)}.jpg",
            label=label,
            split=split,
        )

    for split, count in (("train", n_train), ("validation", n_val), ("test", n_test)):
        for i in range(count):
            samples.append(make(i, i % 2, split))
    return Corpus(samples)


def toy_model(kind="transformer", d=16, heads=4, m=4, seed=0):
    provider = ToyProvider(d=d, m=m, seed=seed)
    config = ModelConfig(
        d=d, heads=heads, patches=m, interaction_kind=kind,
        param_seed=seed, provider_seed=seed,
    )
    return FusionModel(provider, config)


@pytest.fixture
def small_corpus():
    samples = [
        make_sample(0, 1, "train", text="great #winning day emoji_1"),
        make_sample(1, 0, "train", text="plain text here"),
        make_sample(2, 1, "train", text="#sarcasm sure emoji_2"),
        make_sample(3, 0, "train", text="another normal line"),
        make_sample(0, 1, "validation", text="nice #tag"),
        make_sample(1, 0, "validation", text="boring words"),
        make_sample(0, 1, "test", text="test positive emoji_3"),
        make_sample(1, 0, "test", text="test negative"),
    ]
    return Corpus(samples)
