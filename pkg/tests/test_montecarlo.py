import json
import math

import numpy as np
import pytest

from wvqkd.montecarlo import (
    ResolutionError,
    SimConfig,
    density_oracle,
    oracle_deviation,
    oracle_states,
    report_json,
    sample_rounds,
    validation_report,
    wma_discrepancy_probe,
)
from wvqkd.protocol import ProtocolParams
from wvqkd.security_exact import eve_state_exact, joint_prob_exact

P = ProtocolParams(0.1, 1.0, 2.0, bin_width=0.2)


def test_same_seed_same_counts():
    cfg = SimConfig(0.2, P, rounds=200_000, seed=5)
    assert sample_rounds(cfg).counts == sample_rounds(cfg).counts
    assert sample_rounds(cfg).counts != sample_rounds(SimConfig(0.2, P, rounds=200_000, seed=6)).counts


def test_counts_independent_of_workers():
    one = sample_rounds(SimConfig(0.2, P, rounds=300_001, seed=9, workers=1))
    four = sample_rounds(SimConfig(0.2, P, rounds=300_001, seed=9, workers=4))
    assert one.counts == four.counts
    assert one.total == four.total == 300_001


def test_discard_rate_is_half():
    c = sample_rounds(SimConfig(0.1, P, rounds=400_000, seed=1))
    assert abs(c.discarded / c.total - 0.5) < 4 * math.sqrt(0.25 / c.total)


def test_joint_frequencies_within_three_sigma():
    cfg = SimConfig(0.0, ProtocolParams(0.5, 1.0, 1.0, bin_width=0.3), rounds=400_000, seed=3)
    c = sample_rounds(cfg)
    emp, target, n = c.joint(), joint_prob_exact(cfg.eta, cfg.params), c.conclusive
    sigma = np.sqrt(target * (1 - target) / n)
    assert np.all(np.abs(emp - target) < 3 * sigma)


@pytest.mark.parametrize("eta", [0.0, 0.1, 0.4])
@pytest.mark.parametrize("alpha", [1.0, 5.0])
def test_oracle_matches_closed_form(eta, alpha):
    cfg = SimConfig(eta, ProtocolParams(0.1, 1.0, alpha))
    for a in (0, 1):
        for b in (0, 1):
            dev = np.max(np.abs(density_oracle(a, b, cfg).matrix - eve_state_exact(a, b, eta, cfg.params).matrix))
            assert dev < 1e-6


def test_oracle_joint_matches_closed_form():
    cfg = SimConfig(0.15, ProtocolParams(0.2, 1.0, 3.0))
    _, joint = oracle_states(cfg)
    assert np.allclose(joint, joint_prob_exact(0.15, cfg.params), atol=1e-10)


def test_fft_shift_agrees_with_analytic():
    a = SimConfig(0.1, ProtocolParams(0.1, 1.0, 2.0), shift="analytic")
    f = SimConfig(0.1, ProtocolParams(0.1, 1.0, 2.0), shift="fft")
    assert np.allclose(density_oracle(0, 1, a).matrix, density_oracle(0, 1, f).matrix, atol=1e-8)


@pytest.mark.parametrize("points", [256, 1024, 4096])
def test_oracle_converges_on_refined_grids(points):
    assert oracle_deviation(SimConfig(0.2, ProtocolParams(0.1, 1.0, 2.0), grid_points=points)) < 1e-6


def test_coarse_grid_is_reported():
    cfg = SimConfig(0.2, ProtocolParams(0.1, 1.0, 2.0), grid_points=256, grid_half_width=400.0)
    with pytest.raises(ResolutionError):
        oracle_deviation(cfg)


def test_probe_sides_with_all_orders():
    probe = wma_discrepancy_probe(SimConfig(0.25, ProtocolParams(0.1, 1.0, 30.0)))
    assert probe["agrees_with_exact"]
    assert probe["deviation_wma"] > 0.01


def test_validation_report_passes_and_serializes():
    rep = validation_report(SimConfig(0.2, P, rounds=1_000_000, seed=42))
    assert rep["passed"]
    assert not rep["low_power"]
    assert all(abs(z) < 3 for z in rep["z_scores"].values())
    text = report_json(rep)
    assert json.loads(text)["schema_version"] == 1
    assert text == report_json(validation_report(SimConfig(0.2, P, rounds=1_000_000, seed=42)))


def test_low_power_is_flagged_not_failed():
    rep = validation_report(SimConfig(0.2, P, rounds=3000, seed=42))
    assert rep["low_power"]
    gating = [c for c in rep["checks"] if c["gating"]]
    assert {c["name"] for c in gating} == {"z<3:postselection", "oracle_vs_closed_form"}


def test_config_validation():
    with pytest.raises(ValueError):
        SimConfig(0.7, P)
    with pytest.raises(ValueError):
        SimConfig(0.1, P, shift="spline")
    with pytest.raises(ValueError):
        SimConfig(0.1, P, rounds=0)
