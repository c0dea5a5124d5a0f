import json
import os
import pathlib

import numpy as np
import pytest

import setobs

DATA = pathlib.Path(os.environ.get("SETOBS_DATA_DIR", pathlib.Path(__file__).resolve().parents[2] / "data"))


@pytest.fixture(scope="module")
def example():
    model, scenario = setobs.reference_example()
    return model, scenario, setobs.synthesize(model)


def test_model_roundtrip():
    model = setobs.Model.load(str(DATA / "example_model.json"))
    again = setobs.Model.from_json(model.to_json())
    assert (again.n, again.l, again.p, again.N) == (2, 2, 2, 2)
    for a, b in zip(model.A, again.A):
        np.testing.assert_array_equal(a, b)


def test_check_example_vertices():
    model, _ = setobs.reference_example()
    report = setobs.check(model)
    assert report["strong_detectable"] == [True, True]
    assert report["necessary_ok"]


def test_check_rejects_nondetectable():
    report = setobs.check(setobs.Model.load(str(DATA / "nondetectable_model.json")))
    assert not report["necessary_ok"]


def test_synthesis_certificate_verifies(example):
    model, _, gains = example
    ok, eig = setobs.verify_lmi(model, gains["S"], gains["Y"], gains["eta"])
    assert ok and eig >= 0.0
    np.testing.assert_allclose(np.linalg.solve(gains["S"], gains["Y"]), gains["L_tilde"], atol=1e-9)


def test_synthesis_eta_against_cvxpy(example):
    cp = pytest.importorskip("cvxpy")
    model, _, gains = example
    # Independent SDP: the same LMI in the decoupled coordinates, built here from scratch.
    H = np.asarray(model.H)
    U, s, Vt = np.linalg.svd(H)
    r = int(np.sum(s > 1e-9 * max(1.0, s.max())))
    U1, U2, V1, V2 = U[:, :r], U[:, r:], Vt[:r].T, Vt[r:].T
    C, G = np.asarray(model.C), np.asarray(model.G)
    C1, C2 = U1.T @ C, U2.T @ C
    G1, G2 = G @ V1, G @ V2
    M1 = np.linalg.inv(np.diag(s[:r]))
    M2 = np.linalg.pinv(C2 @ G2)
    Phi = np.eye(model.n) - G2 @ M2 @ C2
    n, q = model.n, U2.shape[1]
    Z = np.zeros
    S = cp.Variable((n, n), symmetric=True)
    Y = cp.Variable((n, q))
    eta = cp.Variable()
    cons = []
    for A in model.A:
        Abar = Phi @ (A - G1 @ M1 @ C1)
        top = Abar.T @ (S - C2.T @ Y.T)
        row1 = cp.hstack([S, top, Z((n, n)), Z((n, q)), np.eye(n)])
        row2 = cp.hstack([top.T, S, S - Y @ C2, -Y, Z((n, n))])
        row3 = cp.hstack([Z((n, n)), (S - Y @ C2).T, eta * np.eye(n), Z((n, q)), Z((n, n))])
        row4 = cp.hstack([Z((q, n)), -Y.T, Z((q, n)), eta * np.eye(q), Z((q, n))])
        row5 = cp.hstack([np.eye(n), Z((n, n)), Z((n, n)), Z((n, q)), eta * np.eye(n)])
        F = cp.vstack([row1, row2, row3, row4, row5])
        cons.append((F + F.T) / 2 >> 0)
    cons.append(S >> 1e-8 * np.eye(n))
    prob = cp.Problem(cp.Minimize(eta), cons)
    prob.solve(solver=cp.CLARABEL if "CLARABEL" in cp.installed_solvers() else cp.SCS)
    assert prob.status in ("optimal", "optimal_inaccurate")
    assert gains["eta"] == pytest.approx(prob.value, rel=1e-3)


def test_simulation_contains_errors(example):
    model, scenario, gains = example
    scenario.K = 50
    trace = setobs.simulate(model, scenario, gains["L_tilde"])
    assert trace["x_hat"].shape == (50, model.n)
    assert np.all(trace["err_x"] <= trace["delta_x"] * (1 + 1e-10) + 1e-10)
    assert np.all(trace["err_d"] <= trace["delta_d"] * (1 + 1e-10) + 1e-10)


def test_campaign_reports_no_violations(example):
    model, scenario, gains = example
    scenario.K = 40
    report = setobs.campaign(model, scenario, gains["L_tilde"], trials=20, seed=3)
    assert report["violation_count"] == 0
    assert report["trials"] == 20


def test_convergent_mode_raises_on_example(example):
    model, _, _ = example
    with pytest.raises(setobs.ConvergenceError):
        setobs.synthesize(model, mode="convergent")


def test_cli_usage_exit_code():
    code, _, _ = setobs.run_cli(["bogus"])
    assert code == 64


def test_errors_share_a_base_class():
    with pytest.raises(setobs.Error):
        setobs.synthesize(setobs.Model.load(str(DATA / "nondetectable_model.json")))
