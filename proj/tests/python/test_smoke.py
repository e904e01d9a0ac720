import json
import math
import os
import subprocess

import numpy as np
import pytest

import cklcop

TRUE_THETA_07 = 0.7 / 0.51  # rho / (1 - rho^2) at rho = 0.7


def test_normal_roundtrip():
    for p in (1e-9, 0.025, 0.3, 0.5, 0.975, 1 - 1e-12):
        assert cklcop.std_normal_cdf(cklcop.std_normal_quantile(p)) == pytest.approx(
            p, abs=1e-13
        )
    assert cklcop.std_normal_quantile(0.975) == pytest.approx(
        1.9599639845400536, abs=1e-14
    )


def test_parameter_bijection():
    assert cklcop.rho_to_theta(0.7) == pytest.approx(TRUE_THETA_07, abs=1e-15)
    for rho in (-0.95, -0.3, 0.0, 0.42, 0.99):
        assert cklcop.theta_to_rho(cklcop.rho_to_theta(rho)) == pytest.approx(
            rho, abs=1e-14
        )


def test_gaussian_density_decomposition():
    rho, x, y = 0.6, 0.3, 0.8
    lhs = cklcop.gaussian_copula_log_density(rho, x, y)
    rhs = (
        cklcop.rho_to_theta(rho)
        * cklcop.std_normal_quantile(x)
        * cklcop.std_normal_quantile(y)
        + cklcop.gaussian_normalizing_function(rho, x)
        + cklcop.gaussian_normalizing_function(rho, y)
    )
    assert lhs == pytest.approx(rhs, abs=1e-12)


def test_score_at_independence_is_log2():
    pts = cklcop.sample_gaussian_copula(0.3, 50, seed=5)
    assert cklcop.all_pairs_ckl_score(pts, ["gauss"], [0.0]) == math.log(2.0)
    pairs = cklcop.pair_randomly(pts, 9)
    assert cklcop.empirical_ckl_score(pairs, ["gauss"], [0.0]) == math.log(2.0)


def test_score_gradient_hessian_shapes():
    pairs = cklcop.pair_randomly(cklcop.sample_gaussian_copula(0.5, 60, seed=2), 3)
    theta = [0.4, -0.2]
    g = cklcop.empirical_ckl_gradient(pairs, ["gauss", "xy"], theta)
    h = cklcop.empirical_ckl_hessian(pairs, ["gauss", "xy"], theta)
    assert g.shape == (2,)
    assert h.shape == (2, 2)
    assert np.allclose(h, h.T)
    assert np.linalg.eigvalsh(h).min() >= -1e-12


def test_sampling_is_deterministic():
    a = cklcop.sample_gaussian_copula(0.7, 200, seed=11)
    b = cklcop.sample_gaussian_copula(0.7, 200, seed=11)
    assert np.array_equal(a, b)
    c = cklcop.sample_minfo_approx(["xy"], [3.0], 100, sweeps=5, seed=11)
    d = cklcop.sample_minfo_approx(["xy"], [3.0], 100, sweeps=5, seed=11)
    assert np.array_equal(c, d)
    assert c.shape == (100, 2)


def test_swap_probability_complementarity():
    pr = cklcop.swap_probability(["xy"], [5.0], 0.2, 0.3, 0.7, 0.8)
    back = cklcop.swap_probability(["xy"], [5.0], 0.2, 0.8, 0.7, 0.3)
    assert 0.0 < pr < 1.0
    assert pr + back == pytest.approx(1.0, abs=1e-15)


def test_estimation_recovers_theta():
    pts = cklcop.sample_gaussian_copula(0.7, 2000, seed=7)
    pairs = cklcop.pair_randomly(pts, 11)
    fit = cklcop.estimate_ckl(pairs, ["gauss"], method="newton")
    assert fit.converged
    assert abs(fit.theta_hat[0] - TRUE_THETA_07) < 0.4
    mle = cklcop.estimate_mle_gaussian(pts)
    assert mle.converged
    assert abs(mle.theta_hat[0] - TRUE_THETA_07) < 0.4


def test_loglog_fit_exact():
    n = np.array([10.0, 100.0, 1000.0])
    a, b = cklcop.loglog_fit(n, np.exp(1.0 - 0.5 * np.log(n)))
    assert a == pytest.approx(-0.5, abs=1e-12)
    assert b == pytest.approx(1.0, abs=1e-12)


def test_register_basis():
    tags = cklcop.known_basis_tags()
    for t in ("gauss", "xy", "x2y"):
        assert t in tags
    if "pysmoke_xplusy" not in tags:
        cklcop.register_basis("pysmoke_xplusy", lambda x, y: x + y)
    h = cklcop.h_vector(0.1, 0.2, 0.5, 0.9, ["pysmoke_xplusy"])
    # (x1+y2) + (x2+y1) - (x1+y1) - (x2+y2) = 0 for separable functions
    assert h[0] == pytest.approx(0.0, abs=1e-15)
    assert cklcop.ckl_score(0.1, 0.2, 0.5, 0.9, ["pysmoke_xplusy"], [4.0]) == (
        pytest.approx(math.log(2.0), abs=1e-15)
    )


def test_derive_seed_separates_arguments():
    assert cklcop.derive_seed(1, 2, 3) != cklcop.derive_seed(1, 3, 2)


@pytest.fixture(scope="module")
def cli():
    path = os.environ.get("CKLCOP_CLI")
    if not path or not os.path.exists(path):
        pytest.skip("CKLCOP_CLI not set")
    return path


def run_cli(cli, *args):
    proc = subprocess.run(
        [cli, *args], capture_output=True, text=True, timeout=300
    )
    assert proc.returncode == 0, proc.stderr
    return proc.stdout


def test_cli_sample_then_estimate(cli, tmp_path):
    csv = tmp_path / "pts.csv"
    run_cli(cli, "sample", "gaussian", "--rho", "0.7", "--count", "2000",
            "--seed", "7", "--out", str(csv))
    assert csv.read_text().startswith("x,y\n")
    meta = json.loads((tmp_path / "pts.json").read_text())
    assert meta["provenance"] == "exact-gaussian"

    out = run_cli(cli, "estimate", "--input", str(csv), "--basis", "gauss",
                  "--method", "ckl", "--seed", "11")
    result = json.loads(out)
    assert result["converged"] is True
    assert abs(result["theta_hat"][0] - TRUE_THETA_07) < 0.4

    out = run_cli(cli, "estimate", "--input", str(csv), "--method", "mle")
    assert abs(json.loads(out)["theta_hat"][0] - TRUE_THETA_07) < 0.4


def test_cli_sample_minfo(cli, tmp_path):
    csv = tmp_path / "m.csv"
    run_cli(cli, "sample", "minfo", "--basis", "xy", "--theta", "5",
            "--count", "120", "--sweeps", "8", "--seed", "3", "--out", str(csv))
    pts = np.loadtxt(csv, delimiter=",", skiprows=1)
    assert pts.shape == (120, 2)
    assert pts.min() > 0.0 and pts.max() < 1.0


def test_cli_experiment_and_fit(cli, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({
        "scenario": "gaussian-exact",
        "rho": 0.7,
        "N_grid": [40, 63, 100],
        "trials": 3,
        "estimator": "ckl",
        "base_seed": 42,
    }))
    out_dir = tmp_path / "run"
    summary = json.loads(run_cli(cli, "experiment", "--config", str(cfg),
                                 "--out-dir", str(out_dir)))
    curve_csv = summary["curves"]["ckl"]["csv"]
    assert os.path.exists(curve_csv)
    assert os.path.exists(str(out_dir / "ckl.fit.json"))

    fit = json.loads(run_cli(cli, "fit", "--input", curve_csv))
    assert fit["a"] == pytest.approx(summary["curves"]["ckl"]["a"], abs=1e-12)
