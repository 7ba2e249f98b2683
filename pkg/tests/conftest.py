import warnings

import numpy as np
import pytest

from weightedhodge.geometry import estimate_curvature
from weightedhodge.inequalities import make_setting
from weightedhodge.mesh import dual_volumes, extract_domain, make_disk, make_sphere, make_torus
from weightedhodge.weights import distance_weight, radial_weight, smooth_random_weight, zero_weight

SQRT2 = float(np.sqrt(2.0))


@pytest.fixture(scope="session")
def sphere3():
    return make_sphere(1.0, 3)


@pytest.fixture(scope="session")
def sphere4():
    return make_sphere(1.0, 4)


@pytest.fixture(scope="session")
def shrinker4():
    return make_sphere(SQRT2, 4)


@pytest.fixture(scope="session")
def torus():
    # the standard torus fixture; 96 x 48 keeps fitted curvature within a few percent
    return make_torus(2.0, 1.0, 96, 48)


@pytest.fixture(scope="session")
def torus_small():
    return make_torus(2.0, 1.0, 32, 16)


@pytest.fixture(scope="session")
def disk5():
    return make_disk(1.0, 5)


@pytest.fixture(scope="session")
def disk4():
    return make_disk(1.0, 4)


@pytest.fixture(scope="session")
def curv_sphere4(sphere4):
    return estimate_curvature(sphere4)


@pytest.fixture(scope="session")
def curv_shrinker4(shrinker4):
    return estimate_curvature(shrinker4)


@pytest.fixture(scope="session")
def curv_torus(torus):
    return estimate_curvature(torus)


@pytest.fixture(scope="session")
def unit_sphere_setting(sphere4, curv_sphere4):
    return make_setting(sphere4, zero_weight(sphere4), curv=curv_sphere4)


@pytest.fixture(scope="session")
def shrinker_setting(shrinker4, curv_shrinker4):
    return make_setting(shrinker4, radial_weight(shrinker4, curv_shrinker4, 1.0), curv=curv_shrinker4)


@pytest.fixture(scope="session")
def disk_setting(disk5):
    return make_setting(disk5)


@pytest.fixture(scope="session")
def cap_domain(shrinker4):
    return extract_domain(shrinker4, lambda X: X[:, 2] > 0.0)


@pytest.fixture(scope="session")
def cap_radial_setting(shrinker4, curv_shrinker4, cap_domain):
    return make_setting(cap_domain, radial_weight(shrinker4, curv_shrinker4, 1.0), curv=curv_shrinker4)


@pytest.fixture(scope="session")
def torus_random_weight(torus, curv_torus):
    return smooth_random_weight(torus, seed=7, c=curv_torus)


def unit_cap_distance(level=4, zmin=0.0, a=1.0):
    m = make_sphere(1.0, level)
    c = estimate_curvature(m)
    x0 = int(np.argmax(m.vertices[:, 2]))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        w, cd = distance_weight(m, x0, a, {"l": 1.0, "l1": 1.0, "l2": 1.0}, c)
    dom = extract_domain(m, m.vertices[:, 2] > zmin)
    return make_setting(dom, w, curv=c, comparison=cd, dv=dual_volumes(m))
