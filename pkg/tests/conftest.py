import numpy as np
import pytest

from clustersweep.config import RunConfig
from clustersweep.sweep import run_sweep

# --- shared, expensive runs (built once per session) ---------------------

BLOB_DATA = {
    "synthetic": {
        "kind": "blobs",
        "n_items": 300,
        "seed": 7,
        "structure": {"n_groups": 3, "separation": 20.0},
    }
}
MOONS_DATA = {
    "synthetic": {
        "kind": "moons_noise",
        "n_items": 500,
        "seed": 11,
        "structure": {"noise_fraction": 0.1},
    }
}
TOPICS_DATA = {
    "synthetic": {
        "kind": "planted_topics",
        "n_items": 400,
        "seed": 3,
        "structure": {"n_topics": 4},
    }
}
MOONS_EPS = [round(v, 4) for v in np.linspace(0.05, 0.62, 20)]


def blob_config(out=None, workers=1):
    return RunConfig(
        method="kmeans",
        sweep_param="K",
        sweep_values=[2, 3, 4, 5, 6, 7, 8],
        data=BLOB_DATA,
        fixed={"seed": 0},
        output_dir=str(out) if out else None,
        workers=workers,
    )


@pytest.fixture(scope="session")
def blob_run_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("blob-run")
    run_sweep(blob_config(out))
    return out


@pytest.fixture(scope="session")
def blob_run(blob_run_dir):
    from clustersweep.sweep import load_run

    return load_run(blob_run_dir)


@pytest.fixture(scope="session")
def moons_run():
    cfg = RunConfig(
        method="dbscan",
        sweep_param="eps",
        sweep_values=MOONS_EPS,
        data=MOONS_DATA,
        fixed={"min_samples": 5},
        workers=1,
    )
    return run_sweep(cfg)


@pytest.fixture(scope="session")
def topics_run_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("topics-run")
    cfg = RunConfig(
        method="nmf",
        sweep_param="K",
        sweep_values=[2, 3, 4, 5, 6, 7, 8],
        data=TOPICS_DATA,
        fixed={"seed": 0},
        output_dir=str(out),
        workers=4,
    )
    run_sweep(cfg)
    return out


@pytest.fixture(scope="session")
def topics_run(topics_run_dir):
    from clustersweep.sweep import load_run

    return load_run(topics_run_dir)


# --- acceptance reporting ------------------------------------------------

_ACCEPTANCE: list[tuple[str, str]] = []


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    if report.when != "call" or "test_acceptance" not in item.nodeid:
        return
    doc = (item.function.__doc__ or item.name).strip().splitlines()[0]
    _ACCEPTANCE.append((doc, report.outcome))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.write_sep("-", "acceptance criteria")
    for label, outcome in _ACCEPTANCE:
        status = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"ACCEPTANCE {status}: {label}")
