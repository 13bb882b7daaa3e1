import pytest

from ppga.fixtures import single_voter, split_pair, two_blocs

_CRITERIA = {}


@pytest.fixture
def criterion():
    """Record a pass/fail line for the acceptance summary."""

    def record(number, passed, detail=""):
        _CRITERIA[number] = (passed, detail)

    return record


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        passed, detail = _CRITERIA[number]
        terminalreporter.write_line(f"criterion {number}: {'PASS' if passed else 'FAIL'}  {detail}")


@pytest.fixture(params=["split_pair", "two_blocs", "single_voter"])
def analytic_fixture(request):
    return request.param, {"split_pair": split_pair, "two_blocs": two_blocs, "single_voter": single_voter}[
        request.param
    ]()
