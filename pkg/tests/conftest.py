import pytest

from chaosdemod import kernels

KERNEL_NAMES = (
    "xoshiro_uniform", "xoshiro_normal", "logistic_burn", "logistic_orbit",
    "adam_update", "bn_forward_train", "bn_forward_infer", "bn_backward",
)

ACCEPTANCE_LINES = []


@pytest.fixture(params=kernels.available_backends())
def backend(request, monkeypatch):
    """Run the test once per importable kernel backend."""
    mod = kernels.load_backend(request.param)
    for name in KERNEL_NAMES:
        monkeypatch.setattr(kernels, name, getattr(mod, name))
    monkeypatch.setattr(kernels, "BACKEND", mod.NAME)
    return mod.NAME


@pytest.fixture
def acceptance_line():
    """Record a one-line PASS/FAIL verdict for the end-of-run summary."""
    def record(number, title, ok, detail):
        line = f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {title} ({detail})"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
