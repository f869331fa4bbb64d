import sys

import pytest


@pytest.fixture(autouse=True)
def isolated_core(monkeypatch, tmp_path):
    """Every test talks to the core through an explicit interpreter and a
    private cache directory."""
    monkeypatch.setenv("QK_FRONTEND_CLI", f"{sys.executable} -m qk.cli")
    monkeypatch.setenv("QK_CACHE_DIR", str(tmp_path / "core-cache"))


@pytest.fixture(autouse=True)
def fresh_registry():
    from qk_frontend import decorator

    decorator._KERNEL_REGISTRY.clear()
    yield
    decorator._KERNEL_REGISTRY.clear()
