import json
from pathlib import Path

import pytest

from psicaputo.kernel import make_builtin

DATA = Path(__file__).parent / "data"
CONFIGS = Path(__file__).parent.parent / "configs"

# filled by the acceptance tests, echoed in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)


@pytest.fixture(params=["identity", "log_shift"])
def kernel(request):
    if request.param == "identity":
        return make_builtin("identity")
    return make_builtin("log_shift", 1.0, a=0.0)


@pytest.fixture
def identity():
    return make_builtin("identity")


@pytest.fixture(scope="session")
def expr_corpus():
    return json.loads((DATA / "expr_corpus.json").read_text())["cases"]


@pytest.fixture
def configs_dir():
    return CONFIGS
