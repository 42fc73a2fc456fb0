import numpy as np
import pytest

from burstvst.plane import Domain, ImagePlane


def raw(a):
    return ImagePlane(np.asarray(a, dtype=np.float64), Domain.RAW_LINEAR)


def stab(a):
    return ImagePlane(np.asarray(a, dtype=np.float64), Domain.VST)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def smooth_texture():
    from scipy.ndimage import gaussian_filter

    g = np.random.default_rng(7)
    img = gaussian_filter(g.standard_normal((128, 128)), 3.0)
    img = 0.5 + 0.15 * img / img.std()
    return np.clip(img, 0.0, 1.0)


# --- per-criterion verdicts for the acceptance suite --------------------------

_VERDICTS: dict[int, dict] = {}


@pytest.fixture
def measured(request):
    """Attach a measurement line to the criterion verdict of the current test."""
    def note(text):
        request.node.user_properties.append(("measured", text))
    return note


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or rep.when not in ("setup", "call"):
        return
    if rep.when == "setup" and rep.passed:
        return
    n, text = mark.args
    v = _VERDICTS.setdefault(n, {"text": text, "ok": True, "notes": []})
    v["ok"] = v["ok"] and rep.passed
    v["notes"] += [t for k, t in item.user_properties if k == "measured"]
    if rep.failed and call.excinfo is not None:
        v["notes"].append(f"failed: {call.excinfo.exconly().splitlines()[0][:160]}")


def pytest_terminal_summary(terminalreporter):
    if not _VERDICTS:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for n in sorted(_VERDICTS):
        v = _VERDICTS[n]
        tr.write_line(f"{'PASS' if v['ok'] else 'FAIL'} criterion {n}: {v['text']}")
        for note in v["notes"]:
            tr.write_line(f"    {note}")
