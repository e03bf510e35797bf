from __future__ import annotations

from pathlib import Path

import numpy as np
import pytest
from PIL import Image as PILImage

_CRITERIA: dict[int, dict] = {}


def make_synthetic_faces(root: Path, n_classes=5, per_class=10, side=32, noise=0.01,
                         seed=1234) -> Path:
    """One random prototype per class plus Gaussian pixel noise, saved as PNG."""
    rng = np.random.default_rng(seed)
    root.mkdir(parents=True, exist_ok=True)
    for c in range(n_classes):
        proto = rng.uniform(0.1, 0.9, size=(side, side))
        d = root / f"class{c:02d}"
        d.mkdir(exist_ok=True)
        for i in range(per_class):
            img = np.clip(proto + noise * rng.standard_normal(proto.shape), 0, 1)
            PILImage.fromarray(np.round(img * 255).astype(np.uint8)).save(d / f"img{i:02d}.png")
    return root


@pytest.fixture
def synthetic_faces(tmp_path):
    return make_synthetic_faces(tmp_path / "faces")


def pytest_runtest_logreport(report):
    marker = getattr(report, "criterion", None)
    if marker is None:
        return
    number, title = marker
    entry = _CRITERIA.setdefault(number, {"title": title, "outcomes": set()})
    if report.when == "call" or report.outcome != "passed":
        entry["outcomes"].add("skipped" if report.skipped else report.outcome)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    m = item.get_closest_marker("criterion")
    if m is not None:
        rep.criterion = (m.args[0], m.args[1])


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        entry = _CRITERIA[number]
        outs = entry["outcomes"]
        if "failed" in outs:
            status = "FAIL"
        elif outs == {"skipped"}:
            status = "SKIP"
        else:
            status = "PASS"
        terminalreporter.write_line(f"criterion {number}: {status}  {entry['title']}")
