import pytest

from coupledfwm.coupledmode import RectCoupling, rect_exponential_fit
from coupledfwm.dispersion import DeviceGeometry, FiberLP01, RectEIM
from coupledfwm.phasematch import ProcessConfig


@pytest.fixture(scope="session")
def fiber():
    return FiberLP01()


@pytest.fixture(scope="session")
def table1():
    return DeviceGeometry()


@pytest.fixture(scope="session")
def si_guides(table1):
    g = table1
    return RectEIM(g.w_a_um, g.h_a_um), RectEIM(g.w_b_um, g.h_b_um)


@pytest.fixture(scope="session")
def si_process(si_guides, table1):
    """Table 1 pair, odd branch, every field on the supermode, exponential κ(λ)."""
    a, b = si_guides
    cpl = rect_exponential_fit(table1, 1.265, 1.59)
    return ProcessConfig(a, 1.265, 1.59, guide_b=b, coupling=cpl, branch="odd", supermode_fields="all")


@pytest.fixture(scope="session")
def si_process_rect(si_guides, table1):
    a, b = si_guides
    return ProcessConfig(a, 1.265, 1.59, guide_b=b, coupling=RectCoupling(table1),
                         branch="odd", supermode_fields="all")


@pytest.fixture(scope="session")
def fig2_base(fiber):
    """Fiber pair of the Fig. 2 scenario at the analytic gain peak (odd launch)."""
    from coupledfwm.propagation import SimulationConfig, peak_kappa_analytic

    cfg = SimulationConfig(fiber, length_m=5.7e-3, dz_m=3.4e-6, gamma_per_w_m=0.01,
                           p1_power_w=1e4, p2_power_w=1e4, signal_seed_w=1.0)
    return cfg.with_kappa_p2(peak_kappa_analytic(cfg))


def pytest_terminal_summary(terminalreporter):
    """Print the acceptance ledger collected by tests/test_acceptance.py."""
    import sys

    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
