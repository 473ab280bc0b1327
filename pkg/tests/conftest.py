import pytest

from rcc.corpus import corpus_program
from rcc.pipeline import Pipeline


@pytest.fixture(scope="session")
def corpus():
    return corpus_program()


@pytest.fixture(scope="session")
def pipeline(corpus):
    return Pipeline(corpus)


_LINES = pytest.StashKey()


@pytest.fixture
def acceptance_line(request):
    """Records a criterion's one-line verdict for the terminal summary."""
    lines = request.config.stash.setdefault(_LINES, [])
    return lines.append


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(_LINES, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)
