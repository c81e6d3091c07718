import math

import numpy as np
import pytest

from expdyn import (
    AnnulusReport,
    ClassifyParams,
    CounterexampleParams,
    DomainError,
    annulus_area,
    annulus_scan,
    b_measure_closed_form,
    b_measure_quadrature,
    b_wedge_halfwidth,
    b_wedge_increment,
    counterexample_check,
    headline_summary,
)
from expdyn.measure import _annulus_points, write_annulus_csv, write_summary_json


# ---------------------------------------------------------------------------
# Annulus scans


def test_annulus_area():
    assert annulus_area(2.0) == pytest.approx(12.0 * math.pi)


def test_annulus_points_area_uniform():
    pts = _annulus_points(4.0, 5000, seed=0)
    r = np.abs(pts)
    assert np.all((r >= 4.0) & (r <= 8.0))
    # area-uniform: about 5/12 of the mass below r sqrt(7/4)... use the CDF:
    # P(rho <= t) = (t^2 - r^2) / (3 r^2)
    t = 6.0
    frac = np.mean(r <= t)
    assert frac == pytest.approx((t * t - 16.0) / 48.0, abs=0.02)


def test_scan_fraction_conservation(sin3):
    rep = annulus_scan(sin3, 5.0, 2000, seed=0)
    assert isinstance(rep, AnnulusReport)
    assert sum(rep.fractions.values()) == pytest.approx(1.0)
    assert 0.0 <= rep.e2_fraction <= 1.0
    assert rep.estimated_nonescape_measure == pytest.approx(
        rep.fractions["NonEscapeObserved"] * annulus_area(5.0)
    )
    with pytest.raises(ValueError):
        annulus_scan(sin3, -1.0, 100)
    with pytest.raises(ValueError):
        annulus_scan(sin3, 5.0, 0)


def test_scan_deterministic_per_seed(sin3):
    a = annulus_scan(sin3, 5.0, 1500, seed=7)
    b = annulus_scan(sin3, 5.0, 1500, seed=7)
    assert a.to_dict() == b.to_dict()
    c = annulus_scan(sin3, 5.0, 1500, seed=8)
    assert c.seed != a.seed


def test_scan_conjugation_symmetry(sin3):
    # sin(z^3) commutes with conjugation, so the non-escape fraction of the
    # upper and lower half annuli agree to sampling error (3 sigma)
    pts = _annulus_points(5.0, 20000, seed=1)
    from expdyn import classify_batch

    res = classify_batch(sin3, pts)
    non = res["tag"] == "NonEscapeObserved"
    upper = non[pts.imag > 0]
    lower = non[pts.imag < 0]
    p = non.mean()
    sigma = math.sqrt(max(p * (1 - p), 1e-9) / len(upper))
    assert abs(upper.mean() - lower.mean()) < 3.0 * sigma + 1e-3


# ---------------------------------------------------------------------------
# Wedge analytics


def test_b_measure_closed_form_example():
    # r0 = e^2, R = e^8: 2 (log 8 - log 2) = 2 log 4
    assert b_measure_closed_form(math.e**2, math.e**8) == pytest.approx(2.0 * math.log(4.0))
    with pytest.raises(DomainError):
        b_measure_closed_form(1.0, 100.0)
    with pytest.raises(DomainError):
        b_measure_closed_form(100.0, 50.0)


def test_b_measure_diverges_linearly_in_tower_height():
    # R = e^(e^k): measure from e^e is 2 (k - 1), unbounded in k
    vals = [b_measure_closed_form(math.e**math.e, math.exp(math.e**k)) for k in (2, 3, 4, 5)]
    diffs = [b - a for a, b in zip(vals, vals[1:])]
    assert all(d == pytest.approx(2.0) for d in diffs)


def test_b_measure_quadrature_matches():
    for r0, R in ((10.0, 100.0), (100.0, 10000.0), (math.e**2, math.e**8)):
        closed = b_measure_closed_form(r0, R)
        quad = b_measure_quadrature(r0, R)
        assert abs(quad - closed) < 0.01 * closed


def test_b_wedge_halfwidth_and_increment():
    assert b_wedge_halfwidth(10.0) == pytest.approx(1.0 / (100.0 * math.log(10.0)))
    inc = b_wedge_increment(100.0)
    assert inc == pytest.approx(b_measure_closed_form(100.0, 200.0))
    # increments shrink with radius but every one is positive
    incs = [b_wedge_increment(10.0 * 2**k) for k in range(8)]
    assert all(i > 0 for i in incs)
    assert all(b < a for a, b in zip(incs, incs[1:]))


# ---------------------------------------------------------------------------
# Counterexample checks


def test_counterexample_params_validation():
    with pytest.raises(DomainError):
        CounterexampleParams(r0=2.0)
    with pytest.raises(ValueError):
        CounterexampleParams(eps=-1.0)
    with pytest.raises(ValueError):
        CounterexampleParams(samples=0)


def test_counterexample_check(h_example):
    p = CounterexampleParams(r0=100.0, eps=0.1, samples=500)
    rep = counterexample_check(p, 10000.0, f=h_example, seed=0)
    assert rep["violations"] == 0
    assert rep["max_log_margin"] <= 0.0
    assert rep["inside_eps_disk"]
    assert rep["nonescape_fraction"] >= 0.99
    assert rep["quadrature_rel_err"] < 0.01
    with pytest.raises(DomainError):
        counterexample_check(p, 50.0, f=h_example)


def test_counterexample_deterministic(h_example):
    p = CounterexampleParams(samples=200)
    a = counterexample_check(p, 1000.0, f=h_example, seed=3)
    b = counterexample_check(p, 1000.0, f=h_example, seed=3)
    assert a == b


# ---------------------------------------------------------------------------
# Headline summary and serialization


def test_headline_summary_decreasing(sin3):
    s = headline_summary(sin3, [5.0, 10.0, 20.0], samples=3000, seed=0)
    fracs = [rep.fractions["NonEscapeObserved"] for rep in s["rows"]]
    assert all(b < a for a, b in zip(fracs, fracs[1:]))
    assert fracs[-1] < 0.01
    # cumulative series are non-decreasing and worst dominates best
    for seq in (s["cumulative_best"], s["cumulative_worst"]):
        assert all(b >= a for a, b in zip(seq, seq[1:]))
    assert all(w >= b for w, b in zip(s["cumulative_worst"], s["cumulative_best"]))
    assert all(t < 1.0 for t in s["tail_bounds"])


def test_headline_summary_empty(sin3):
    s = headline_summary(sin3, [], samples=10)
    assert s["rows"] == [] and s["cumulative_best"] == []


def test_csv_and_json_outputs(tmp_path, sin3):
    rep = annulus_scan(sin3, 5.0, 500, seed=0)
    csv_path = tmp_path / "ann.csv"
    write_annulus_csv(csv_path, [rep])
    lines = csv_path.read_text().strip().splitlines()
    assert lines[0].split(",")[0] == "r"
    assert len(lines) == 2

    s = headline_summary(sin3, [5.0], samples=200, seed=0)
    json_path = tmp_path / "summary.json"
    write_summary_json(json_path, s)
    import json

    data = json.loads(json_path.read_text())
    assert data["radii"] == [5.0]
    assert data["rows"][0]["samples"] == 200
