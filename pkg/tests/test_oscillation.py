import math

import numpy as np
import pytest

from hutchfrac import corpus
from hutchfrac.metrics import Cloud, Euclidean
from hutchfrac.oscillation import (
    CONDITIONS, ChainConflict, OscillationProfile, Verdict, classify, default_t_grid,
    iterate_profile, oscillation_analytic, oscillation_empirical, propagate_chain,
    sample_pairs, system_power_oscillation,
)
from hutchfrac.spaces import Affine, Builtin, Clamp1D, DomainBox, IfsSystem

GRID_1D = Cloud(np.linspace(0, 2, 201)[:, None])


def halving_1d(lo=0.0, hi=1.0):
    return IfsSystem((Affine([[0.5]], [0.0]),), DomainBox([lo], [hi]))


def test_default_grid_shape():
    t = default_t_grid(2.0)
    assert len(t) == 32 and t[0] == pytest.approx(2e-3) and t[-1] == pytest.approx(2.0)
    assert np.all(np.diff(t) > 0)


def test_identity_profile_is_attained_distances():
    ident = IfsSystem((Affine([[1.0]], [0.0]),), DomainBox([0], [1]))
    pts = Cloud(np.array([[0.0], [0.25], [1.0]]))
    t = np.array([0.1, 0.3, 0.8, 1.0])
    prof = oscillation_empirical(ident, Euclidean(), pts, t)
    assert prof.values.tolist() == [0.0, 0.25, 0.75, 1.0]


def test_halving_empirical_at_one():
    pts = Cloud(np.linspace(0, 1, 11)[:, None])
    prof = oscillation_empirical(halving_1d(), Euclidean(), pts, [1.0])
    assert prof.values[0] == pytest.approx(0.5)


def test_fg_single_letter_oscillation(fg):
    prof = oscillation_empirical(fg, Euclidean(), GRID_1D, [2.0])
    assert prof.values[0] == pytest.approx(1.0)


def test_analytic_profiles():
    prof = oscillation_analytic(halving_1d(0, 4), Euclidean(), [2.0])
    assert prof.values[0] == pytest.approx(1.0) and prof.mode == "analytic_exact"
    f = Clamp1D(1, -1, 0, 2)
    t = np.array([0.1, 0.5, 1.0, 1.5, 2.0])
    prof = oscillation_analytic(f, Euclidean(), t, DomainBox([0], [2]))
    assert np.allclose(prof.values, np.minimum(t, 1.0))
    assert prof.mode == "analytic_exact"


def test_clamp_analytic_matches_grid_oracle():
    f = Clamp1D(1, -1, 0, 2)
    sys_ = IfsSystem((f,), DomainBox([0], [2]))
    t = np.array([0.2, 0.6, 1.0, 1.4, 2.0])
    emp = oscillation_empirical(sys_, Euclidean(), GRID_1D, t)
    ana = oscillation_analytic(f, Euclidean(), t, DomainBox([0], [2]))
    assert np.allclose(emp.values, ana.values, atol=1e-9)


def test_edelstein_upper_bound_dominates_empirical():
    box = DomainBox([0], [10])
    sys_ = IfsSystem((Builtin("edelstein_exp"),), box, self_mapping_declared=False)
    t = default_t_grid(10.0)
    ana = oscillation_analytic(sys_.maps[0], Euclidean(), t, box)
    assert ana.mode == "analytic_upper_bound"
    assert np.allclose(ana.values, t * -math.expm1(-10))
    emp = oscillation_empirical(sys_, Euclidean(), Cloud(np.linspace(0, 10, 301)[:, None]), t)
    assert np.all(emp.values <= ana.values + 1e-9)


def test_iterate_profile_examples():
    t = np.array([0.125, 0.25, 0.5, 1.0, 2.0, 4.0, 8.0])
    half = OscillationProfile(t, t / 2, "analytic_exact")
    assert iterate_profile(half, 3)(8.0) == pytest.approx(1.0)
    ident = OscillationProfile(t, t.copy(), "analytic_exact")
    assert np.array_equal(iterate_profile(ident, 7).values, t)
    capped = OscillationProfile(t, np.minimum(t, 1.0), "analytic_exact")
    assert iterate_profile(capped, 5)(2.0) == pytest.approx(1.0)


def test_system_power_examples(fg, sierpinski):
    prof = system_power_oscillation(fg, Euclidean(), 6, GRID_1D, [2.0])
    assert prof.values[0] >= 1.0
    assert tuple(prof.witnesses[0]["word"]) == (0, 1) * 3
    f_only = fg.subsystem((0,))
    assert system_power_oscillation(f_only, Euclidean(), 2, GRID_1D, [0.5, 2.0]).values.max() == 0
    pts = Cloud(sierpinski.domain.grid(12))
    prof = system_power_oscillation(sierpinski, Euclidean(), 4, pts, [math.sqrt(2)])
    assert prof.values[0] <= math.sqrt(2) / 16 + 1e-9


def test_iterated_profile_dominates_power_oscillation():
    sys_ = IfsSystem((Affine([[0.5, 0.2], [0.0, 0.6]], [0.1, 0.0]),), DomainBox([0, 0], [1, 1]))
    t = default_t_grid(sys_.domain.diameter)
    ana = oscillation_analytic(sys_.maps[0], Euclidean(), t, sys_.domain)
    pts = Cloud(sys_.domain.grid(10))
    for n in (1, 2, 3):
        emp = system_power_oscillation(sys_, Euclidean(), n, pts, t)
        assert np.all(emp.values <= iterate_profile(ana, n).values + 1e-9)


def test_pair_sampling_is_nested():
    small = sample_pairs(1000, 5000, seed=4)
    big = sample_pairs(1000, 10000, seed=4)
    assert np.array_equal(np.asarray(big[0])[:5000], np.asarray(small[0]))
    assert np.array_equal(np.asarray(big[1])[:5000], np.asarray(small[1]))


def test_classify_sierpinski_all_verified(sierpinski):
    rep = classify(sierpinski, [Euclidean()])
    assert all(rep.status(c) == "verified" for c in CONDITIONS)
    assert rep.metrics[0].verdicts["banach"].certificate["lambda"] == pytest.approx(0.5)


def test_classify_fg_counterexample():
    entry = corpus.load_example("fg_interval")
    rep = classify(entry.system, entry.multimetric, entry.config)
    ev = rep.metrics[0].verdicts["eventual"]
    assert ev.status == "refuted"
    assert ev.witness["pair"] == [[0.0], [2.0]] and ev.witness["image"] == [[0.0], [1.0]]
    assert set(ev.witness["word_label"]) == {"f", "g"}
    for sub in ((0,), (1,)):
        r = classify(entry.system.subsystem(sub), entry.multimetric, entry.config)
        assert r.status("eventual") == "verified"


def test_classify_edelstein_box_carries_note():
    entry = corpus.load_example("edelstein_exp")
    rep = classify(entry.system, entry.multimetric, entry.config)
    assert rep.status("edelstein") == "verified"
    assert rep.status("banach") == "verified"
    assert rep.metrics[0].verdicts["banach"].certificate["lambda"] == pytest.approx(-math.expm1(-10))
    assert any("box" in n for n in rep.notes)
    assert rep.to_dict()["domain"]["hi"] == [10.0]


def test_propagation_fills_implied_verdicts():
    v = {c: Verdict() for c in CONDITIONS}
    v["banach"] = Verdict("verified", "test")
    out = propagate_chain(v)
    assert all(out[c].status == "verified" for c in CONDITIONS)
    v = {c: Verdict() for c in CONDITIONS}
    v["edelstein"] = Verdict("refuted", "test")
    out = propagate_chain(v)
    assert out["banach"].status == "refuted" and out["eventual"].status == "undetermined"


def test_propagation_detects_conflict():
    v = {c: Verdict() for c in CONDITIONS}
    v["banach"] = Verdict("verified", "a")
    v["matkowski"] = Verdict("refuted", "b")
    with pytest.raises(ChainConflict):
        propagate_chain(v)
