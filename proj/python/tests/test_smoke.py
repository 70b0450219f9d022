import numpy as np
import pytest

import rankprox as rp


def completion_problem(seed=1, noise=0.01, outliers=0.0):
    data = rp.gen_synthetic(m=120, r=3, omega=4.0, noise=noise,
                            outlier_fraction=outliers, outlier_range=20.0, seed=seed)
    return data


def test_synthetic_shapes():
    data = completion_problem()
    train, test = data["train"], data["test"]
    assert train.shape == (120, 120)
    assert len(test) == round(0.25 * len(train))
    pairs = set(zip(train.rows, train.cols))
    assert not pairs & set(zip(test.rows, test.cols))
    assert data["truth"].rank == 3


def test_truth_rmse_matches_noise_level():
    data = completion_problem()
    err = rp.rmse(data["truth"], data["test"])
    assert 0.5 * data["noise_level"] < err < 1.5 * data["noise_level"]


def test_sp_completion_recovers_low_rank():
    data = completion_problem(noise=0.0)
    spec = rp.ProblemSpec.completion(data["train"])
    hp = rp.heuristics(spec, nu=0.001)
    cfg = rp.SolverConfig()
    cfg.kappa = 1
    cfg.eps_inner = 1e-6
    cfg.eps_outer = 1e-4
    cfg.max_inner = 2000
    seen = []
    sol = rp.sp_solve(spec.with_parameters(hp["gamma"], 0.0), cfg,
                      lambda x: seen.append(x.rank) or rp.rmse(x, data["test"]))
    assert seen
    assert sol.x.rank >= 3
    rel = rp.rmse(sol.x, data["test"]) / np.sqrt(np.mean(np.square(data["test"].values)))
    assert rel < 0.05
    ok, violations = sol.validate_trace(cfg.beta)
    assert ok, violations
    assert sol.svd_stats["max_truncated_rank"] <= cfg.kappa
    records = sol.trace
    assert records[0]["kind"] == "init"
    assert all(r["test_rmse"] is not None for r in records)


def test_dense_agrees_with_factors():
    data = completion_problem()
    x = data["truth"]
    dense = x.to_dense()
    u, s, v = x.u, x.sigma, x.v
    np.testing.assert_allclose(dense, u @ np.diag(s) @ v.T, atol=1e-9)
    assert x.entry(3, 7) == pytest.approx(dense[3, 7])


def test_lrr_clusters_subspaces():
    d, labels = rp.gen_subspaces(subspaces=3, seed=2)
    spec = rp.ProblemSpec.lrr(d, rp.ShrinkKind.L21)
    hp = rp.heuristics(spec)
    cfg = rp.SolverConfig()
    cfg.kappa = hp["kappa"]
    sol = rp.sp_solve(spec.with_parameters(hp["gamma"], hp["lam"]), cfg)
    pred, acc = rp.cluster(sol.x, 3, truth=labels)
    assert len(pred) == d.shape[1]
    assert acc >= 0.9


def test_invalid_input_raises():
    with pytest.raises(ValueError):
        rp.Observations(3, 3, [0, 5], [0, 1], [1.0, 2.0])
    with pytest.raises(ValueError):
        rp.Observations(3, 3, [0], [0, 1], [1.0])
    cfg = rp.SolverConfig()
    cfg.chi = 0.9
    with pytest.raises(ValueError):
        cfg.validate()


def test_parse_error_reports_line(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("0,0,1.0\n1,oops,2.0\n")
    with pytest.raises(rp.ParseError, match=":2"):
        rp.load_triplets(str(bad))
