"""Shared fixtures: repo paths and the checked-in scene assets."""

from pathlib import Path

import pytest

REPO_ROOT = Path(__file__).resolve().parent.parent


@pytest.fixture(scope="session")
def repo_root() -> Path:
    return REPO_ROOT


@pytest.fixture(scope="session")
def scenes_dir() -> Path:
    d = REPO_ROOT / "scenes"
    if not d.is_dir():
        pytest.skip("scenes/ assets not generated")
    return d


@pytest.fixture(scope="session")
def triangle_gltf(scenes_dir: Path) -> Path:
    return scenes_dir / "triangle.gltf"


@pytest.fixture(scope="session")
def bench_gltf(scenes_dir: Path) -> Path:
    return scenes_dir / "bench.gltf"


@pytest.fixture(scope="session")
def demo_gltf(scenes_dir: Path) -> Path:
    return scenes_dir / "demo.gltf"
