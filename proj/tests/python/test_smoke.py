import json
import math

import numpy as np
import pytest

import envelope_lab as el


def test_version():
    assert el.__version__ == "0.1.0"


def test_p_symbol_matches_direct_formula():
    xi = np.array([-3.0, -0.5, 0.0, 0.7, 2.0])
    eps = 0.5
    z = eps * xi
    direct = (np.sqrt(1 + (1 + z) ** 2) - math.sqrt(2) - z / math.sqrt(2)) / eps**2
    assert np.allclose(el.p_symbol(xi, eps), direct, rtol=1e-12, atol=1e-14)
    assert np.allclose(el.schrodinger_symbol(xi), xi**2 / (4 * math.sqrt(2)))


def test_dealiased_cubic_of_a_mode():
    n = 32
    x = el.grid_points(1.0, n)
    e3 = np.exp(3j * x)
    cube = el.dealiased_cubic(e3, e3, e3)
    assert np.allclose(cube, np.exp(9j * x), atol=1e-13)
    # |e|^2 e with the middle factor conjugated.
    assert np.allclose(el.dealiased_cubic(e3, e3, e3, conj=[False, True, False]), e3, atol=1e-13)


def test_profile_is_normalized_and_seeded():
    a = el.make_profile("fourier_tail", 8.0, 256, 0.25, s=1.0, seed=3)
    b = el.make_profile("fourier_tail", 8.0, 256, 0.25, s=1.0, seed=3)
    c = el.make_profile("fourier_tail", 8.0, 256, 0.25, s=1.0, seed=4)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)
    with pytest.raises(ValueError):
        el.make_profile("square", 8.0, 256, 0.25)


def test_fit_slope():
    slope, residual = el.fit_slope([0.5, 0.25, 0.125], [0.25, 0.0625, 0.015625])
    assert slope == pytest.approx(2.0, abs=1e-13)
    assert residual < 1e-13


def test_config_errors_raise_value_error():
    cfg = el.default_config("converge-linear")
    cfg["eps"] = [0.3]
    with pytest.raises(ValueError):
        el.run_study(cfg)


def test_quick_linear_study_and_outputs(tmp_path):
    report = el.run_study("converge-linear", eps=[0.5, 0.25, 0.125], T=0.5,
                          profile={"family": "gaussian"})
    assert report["study"] == "converge-linear"
    series = report["series"][0]
    assert len(series["points"]) == 3
    assert series["slope"] > 0.9
    manifest = el.emit_outputs(report, tmp_path, "csv,json")
    data = json.loads(open(manifest).read())
    assert {a["path"] for a in data["artifacts"]} == {"converge-linear.csv", "converge-linear.json"}


def test_dual_route_small():
    gap = el.dual_route_gap(eps=0.25, T=0.25, periods=4.0, slow_n=64, samples=4)
    assert gap < 1e-5
