import numpy as np
import pytest

from marketqa import datapipe, textproc
from marketqa.ranker import Model, ModelConfig


@pytest.fixture(scope="session")
def shared_vocab():
    corpus = [
        "what colours are available", "which colour can i pick",
        "the finish is crimson red all over", "it measures 90 by 90 cm across",
        "postage to your door is 12 dollars", "do you do delivery",
        "crafted from solid oak wood throughout", "what are the options",
        "i want to ask about the colour", "thanks for viewing my listing",
    ]
    return textproc.build_vocab(corpus, 400, 600)


@pytest.fixture(scope="session")
def shared_model(shared_vocab):
    cfg = ModelConfig(embed_dim=8, ff_layers=2, ff_size=8, lstm_hidden=6,
                      unigram_cap=400, bigram_cap=600)
    return Model(cfg, shared_vocab, np.random.default_rng(123))


@pytest.fixture()
def fixtures_dir(tmp_path):
    listings = [
        datapipe.Listing("fix-001", "cat tower",
                         "The finish is cream white all over. "
                         "It measures 185 by 60 cm across. "
                         "Thanks for viewing my listing."),
        datapipe.Listing("fix-002", "office chair",
                         "Postage to your door is 12 dollars. "
                         "Crafted from brushed steel throughout."),
    ]
    datapipe.write_listings(tmp_path / "listings.jsonl", listings)
    return tmp_path
