import pytest

from botweave.config import load_config
from botweave.corpus import bundled_bot_corpus, bundled_real_corpora
from botweave.generator import GenParams, generate
from botweave.pipeline import run_pipeline

# Small enough for unit tests, big enough for the graph construction to be
# non-degenerate.
MINI = GenParams(seed=4242, n_bots=60, n_real=240, external_pool=2000)


@pytest.fixture(scope="session")
def bot_corpus():
    return bundled_bot_corpus()


@pytest.fixture(scope="session")
def real_corpora():
    return bundled_real_corpora()


@pytest.fixture(scope="session")
def mini_params():
    return MINI


@pytest.fixture(scope="session")
def mini_dataset(bot_corpus, real_corpora):
    return generate(MINI, bot_corpus, real_corpora)


@pytest.fixture(scope="session")
def desk_params():
    # the documented acceptance scale: 5,000 bots + 20,000 reals
    return GenParams()


@pytest.fixture(scope="session")
def desk_dataset(bot_corpus, real_corpora, desk_params):
    return generate(desk_params, bot_corpus, real_corpora)


@pytest.fixture(scope="session")
def desk_pipeline(tmp_path_factory):
    cfg = load_config(out_dir=str(tmp_path_factory.mktemp("desk-run")), env={})
    result = run_pipeline(cfg)
    return cfg, result
