import numpy as np
import pytest

from facegeom.records import LandmarkSet
from facegeom.synth import template_face


@pytest.fixture(scope="session")
def template_points() -> np.ndarray:
    return template_face()


@pytest.fixture()
def make_noisy_face(template_points):
    """Template face plus two-sided gaussian jitter, still a valid LandmarkSet."""

    def _make(rng: np.random.Generator, sigma: float = 3.0) -> LandmarkSet:
        pts = template_points + rng.normal(0.0, sigma, size=template_points.shape)
        np.clip(pts, 0.0, 512.0, out=pts)
        return LandmarkSet(pts, 512, 512)

    return _make
