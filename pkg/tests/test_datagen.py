import json
import math

import numpy as np
import pytest

from wci.binning import assign, build_grid
from wci.datagen import (
    FunctionSpec,
    NoiseSpec,
    ScenarioError,
    ScenarioSpec,
    conditional_separation,
    gen_additive_null,
    gen_polar,
    gen_shared_noise_alt,
    generate,
    load_scenario,
    scenario_from_dict,
    support_diameter,
)
from wci.measures import empirical_measure, product_measure
from wci.ot import wasserstein_exact


def test_degenerate_null():
    spec = ScenarioSpec("additive_null", n=50, noise=NoiseSpec("none"))
    data = gen_additive_null(spec)
    assert np.all(data.x == 0) and np.all(data.y == 0)


@pytest.mark.parametrize("kind", ["additive_null", "shared_noise_alt", "polar"])
def test_seed_determinism(kind):
    spec = ScenarioSpec(kind, n=200, seed=7, rho=0.5, f=FunctionSpec(slope=1.0))
    a, b = generate(spec), generate(spec)
    assert a.x.tobytes() == b.x.tobytes() and a.z.tobytes() == b.z.tobytes()
    c = generate(spec.with_seed(8))
    assert c.x.tobytes() != a.x.tobytes()


def test_truncation_respects_radius():
    noise = NoiseSpec("truncated_gaussian", sigma=0.5, radius=0.3)
    e = noise.sample(np.random.default_rng(0), 20000, 3)
    assert np.linalg.norm(e, axis=1).max() <= 0.3
    # rejection, not clipping: no atoms sit exactly on the boundary sphere
    assert not np.any(np.isclose(np.linalg.norm(e, axis=1), 0.3, rtol=0, atol=1e-12))


def test_unbounded_noise_refused_when_bounded():
    with pytest.raises(ScenarioError, match="unbounded"):
        ScenarioSpec("additive_null", n=10, noise=NoiseSpec("gaussian", sigma=1.0))
    ScenarioSpec("additive_null", n=10, noise=NoiseSpec("gaussian", sigma=1.0), bounded=False)


def test_shared_noise_rho_zero():
    with pytest.raises(ScenarioError, match="use gen_additive_null"):
        gen_shared_noise_alt(ScenarioSpec("shared_noise_alt", n=10, rho=0.0))


def test_rho_one_gives_diagonal():
    spec = ScenarioSpec("shared_noise_alt", n=100, rho=1.0, noise=NoiseSpec("uniform", a=0.4))
    data = gen_shared_noise_alt(spec)
    np.testing.assert_allclose(data.x, data.y)


def test_two_point_separation_enumerated():
    # joint on {(-a,-a),(a,a)}, product on the 4 corners: move the 2 off-diagonal
    # quarter masses a distance 2a each -> W_1 = a
    a = 0.7
    spec = ScenarioSpec("shared_noise_alt", n=10, rho=1.0, noise=NoiseSpec("two_point", a=a))
    sep = conditional_separation(spec, [0.3], 1)
    assert sep.method == "population"
    assert sep.value == pytest.approx(a, abs=1e-12)
    joint = empirical_measure([(-a, -a), (a, a)])
    prod = product_measure(empirical_measure([(-a,), (a,)]), empirical_measure([(-a,), (a,)]))
    assert wasserstein_exact(joint, prod, 1).distance == pytest.approx(a, abs=1e-12)


def test_partial_rho_separation_measured():
    spec = ScenarioSpec("shared_noise_alt", n=10, rho=0.5, noise=NoiseSpec("uniform", a=1.0))
    sep = conditional_separation(spec, [0.5], 1, n_ref=300, seed=1)
    assert sep.method == "monte_carlo" and sep.value > 0
    null = ScenarioSpec("additive_null", n=10, noise=NoiseSpec("two_point", a=1.0))
    assert conditional_separation(null, [0.5], 1).value == pytest.approx(0, abs=1e-12)


def test_null_bins_are_translates():
    spec = ScenarioSpec(
        "additive_null", n=1000, seed=7, f=FunctionSpec(slope=1.0), g=FunctionSpec(slope=-1.0),
        noise=NoiseSpec("truncated_gaussian", sigma=0.1, radius=0.3),
    )
    data = generate(spec)
    noise_x = data.x - data.z
    cells = assign(data, build_grid(data.z, 0.25))
    keys = sorted(cells)
    # the X-noise parts of two bins have the same law; shifting one bin's
    # noise by v moves its empirical law by exactly |v|
    a = empirical_measure(noise_x[cells[keys[0]]])
    assert wasserstein_exact(a, a.shifted([0.3]), 2).distance == pytest.approx(0.3, abs=1e-9)
    b = empirical_measure(noise_x[cells[keys[-1]]])
    assert wasserstein_exact(a, b, 1).distance < 0.05


def test_polar_constant_angles_chord():
    spec = ScenarioSpec("polar", n=400, seed=1, r_min=1.0, r_max=2.0, angle_base=(0.3, 1.1))
    data = gen_polar(spec)
    r = data.z[:, 0]
    np.testing.assert_allclose(np.linalg.norm(data.x, axis=1), r)
    # slices at r1, r2 are single atoms; W_p between them is the chord |r1 - r2|
    i, j = np.argmin(r), np.argmax(r)
    d = wasserstein_exact(empirical_measure(data.x[[i]]), empirical_measure(data.x[[j]]), 2).distance
    assert d == pytest.approx(abs(r[j] - r[i]), abs=1e-12)


def test_polar_single_circle_and_errors():
    data = gen_polar(ScenarioSpec("polar", n=20, r_min=1.5, r_max=1.5))
    assert np.all(data.z == 1.5)
    assert build_grid(data.z, 0.1).n_cells == 1
    with pytest.raises(ScenarioError):
        gen_polar(ScenarioSpec("polar", n=20, r_min=0.0, r_max=1.0))


def test_tabulated_function():
    f = FunctionSpec("tabulated", knots=(0.0, 1.0), values=(0.0, 2.0))
    out = f(np.array([[0.25], [0.5]]), 1)
    np.testing.assert_allclose(out[:, 0], [0.5, 1.0])


def test_support_diameter_covers_sample():
    spec = ScenarioSpec(
        "shared_noise_alt", n=5000, seed=0, rho=0.4, f=FunctionSpec(slope=1.0), g=FunctionSpec(slope=-0.5),
        noise=NoiseSpec("uniform", a=0.2),
    )
    data = generate(spec)
    pts = data.xy()
    ext = np.linalg.norm(pts.max(axis=0) - pts.min(axis=0))
    assert ext <= support_diameter(spec)


def test_scenario_json(tmp_path):
    spec = ScenarioSpec("additive_null", n=30, seed=3, f=FunctionSpec(slope=2.0), noise=NoiseSpec("uniform", a=0.1))
    path = tmp_path / "s.json"
    path.write_text(json.dumps(spec.to_dict()))
    back = load_scenario(path)
    assert back == spec
    with pytest.raises(ScenarioError, match="unknown scenario keys"):
        scenario_from_dict({"kind": "additive_null", "n": 3, "bogus": 1})
    with pytest.raises(ScenarioError, match="missing"):
        scenario_from_dict({"kind": "additive_null"})
    with pytest.raises(ScenarioError):
        scenario_from_dict({"kind": "additive_null", "n": 3, "noise": {"kind": "cauchy"}})
