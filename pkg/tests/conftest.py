import pytest

from optbankrupt import ModelParams, get_preset, solve_model, solve_no_bankruptcy


@pytest.fixture(scope="session")
def base_params():
    return ModelParams()


@pytest.fixture(scope="session")
def base_sol(base_params):
    return solve_model(base_params)


@pytest.fixture(scope="session")
def sim_sol():
    return solve_model(ModelParams(x0=25.0))


@pytest.fixture(scope="session")
def nob_sol(base_params):
    return solve_no_bankruptcy(base_params)


@pytest.fixture(scope="session")
def full_leisure_sol():
    pr = get_preset("full_leisure")
    return solve_model(pr.params, pr.waive)


# --- acceptance report: one PASS/FAIL line per criterion ---------------------

_ACCEPTANCE = pytest.StashKey[dict]()


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")
    config.stash[_ACCEPTANCE] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or (rep.when != "call" and rep.passed):
        return
    num, title = mark.args
    detail = "; ".join(str(v) for k, v in item.user_properties if k == "detail")
    if rep.failed and not detail:
        detail = str(call.excinfo.value).splitlines()[0] if call.excinfo else rep.when
    lines = item.config.stash[_ACCEPTANCE]
    if rep.when == "call" or rep.failed:
        lines[num] = f"{'PASS' if rep.passed else 'FAIL'} {num:2d}. {title}: {detail}"


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(_ACCEPTANCE, {})
    if lines:
        terminalreporter.section("acceptance criteria")
        for num in sorted(lines):
            terminalreporter.write_line(lines[num])
