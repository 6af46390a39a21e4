import numpy as np
import pytest

from rsudeploy.scenario import scenario_from_dict


def make_scenario(width=3, height=3, cell=20.0, obstacles=(), traces=(), areas=(), radius=300.0, periods=None):
    """Small scenario from plain lists; ``traces`` is a list of per-period cell lists (None = absent)."""
    traces = [list(t) for t in traces]
    if periods is None:
        periods = len(traces[0]) if traces else 1
    return scenario_from_dict({
        "grid": {"width": width, "height": height, "cell_size_m": cell},
        "obstacles": list(obstacles),
        "periods": {"count": periods, "length_s": 30.0},
        "coverage_radius_m": radius,
        "sensitive_areas": [{"x_m": x, "y_m": y, "radius_m": r} for x, y, r in areas],
        "traces": [{"id": f"v{i}", "positions": t} for i, t in enumerate(traces)],
    })


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_offload_instance(rng, policy="penalty"):
    """One-period IBRSG instance with at most 3 RSUs and 6 vehicles on a 6x6 grid.

    Returns the scenario, deployment, link and queue parameters, and the
    (vehicle, RSU slot) transmission-delay table as nested lists.
    """
    from rsudeploy.objectives import make_deployment
    from rsudeploy.radio import LinkBudgetParams, LinkTable, QueueParams

    k = 36
    obstacles = np.flatnonzero(rng.random(k) < 0.2)
    free = np.setdiff1d(np.arange(k), obstacles)
    n_rsu = int(rng.integers(1, 4))
    n_veh = int(rng.integers(1, 7))
    rsus = np.sort(rng.choice(k, size=n_rsu, replace=False))
    cells = rng.choice(free, size=n_veh, replace=True)
    scenario = make_scenario(6, 6, obstacles=obstacles.tolist(), traces=[[int(c)] for c in cells],
                             radius=float(rng.uniform(30.0, 120.0)))
    params = LinkBudgetParams(shadow_seed=int(rng.integers(1 << 30)))
    q = QueueParams(service_rate=float(rng.choice([1.5, 2.0, 3.0, 20.0])), saturation_policy=policy)
    links = LinkTable(scenario, params)
    trans = links.trans_matrix(rsus)[links.row_of[cells]].tolist()
    return scenario, make_deployment(scenario, rsus), params, q, trans, rsus


# acceptance criterion number -> (passed, detail); printed in the terminal summary
ACCEPTANCE: dict = {}


def report(number: int, ok: bool, detail: str) -> None:
    """Record and print one acceptance line, then fail the calling test if it did not pass."""
    ACCEPTANCE[number] = (bool(ok), detail)
    print(f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}")
    assert ok, f"criterion {number} failed: {detail}"


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for number in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
