import pytest

_ACCEPTANCE: list[tuple[str, str, list]] = []


@pytest.fixture
def measured(request):
    """Record named measurements; they are echoed in the acceptance summary."""
    def put(name, value):
        request.node.user_properties.append((name, value))
    return put


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    if "test_acceptance" not in item.nodeid:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        doc = (item.function.__doc__ or item.name).strip().splitlines()[0]
        _ACCEPTANCE.append((report.outcome.upper(), doc, list(item.user_properties)))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for outcome, doc, props in _ACCEPTANCE:
        flag = "PASS" if outcome == "PASSED" else "FAIL"
        tr.write_line(f"{flag}  {doc}")
        for name, value in props:
            text = f"{value:.6g}" if isinstance(value, float) else str(value)
            tr.write_line(f"        {name} = {text}")
    passed = sum(o == "PASSED" for o, _, _ in _ACCEPTANCE)
    tr.write_line(f"{passed}/{len(_ACCEPTANCE)} criteria pass")
