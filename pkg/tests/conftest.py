import pytest

from forcelab import corpus


@pytest.fixture
def fork():
    return corpus.fork()


@pytest.fixture(params=[name for name, _ in corpus.corpus_notions()])
def corpus_notion(request):
    return dict(corpus.corpus_notions())[request.param]
