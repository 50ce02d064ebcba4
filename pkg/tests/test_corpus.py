import math

import numpy as np
import pytest

from hutchfrac import corpus
from hutchfrac.metrics import Coordinate
from hutchfrac.oscillation import CONDITIONS, chain_violations, classify


def verdict_table(report):
    return [{c: m.status(c) for c in CONDITIONS} for m in report.metrics]


def test_names():
    assert set(corpus.names()) >= {"sierpinski", "cantor", "fg_interval", "edelstein_exp",
                                   "product_halving_k8", "swap_halve", "plane_two_coords"}
    with pytest.raises(KeyError):
        corpus.load_example("menger")


def test_fg_entry_shape():
    e = corpus.load_example("fg_interval")
    assert len(e.system.maps) == 2 and e.system.domain.hi.tolist() == [2.0]
    assert e.expected[0]["eventual"] == "refuted"
    assert all(v[0]["eventual"] == "verified" for v in e.expected_subsystems.values())


def test_product_halving_entry():
    e = corpus.load_example("product_halving_k8")
    assert e.system.dim == 8
    assert e.multimetric.members == tuple(Coordinate(i) for i in range(8))
    rep = classify(e.system, e.multimetric, e.config)
    for m in rep.metrics:
        assert m.status("banach") == "verified"
        assert m.verdicts["banach"].certificate["lambda"] == pytest.approx(0.5)


@pytest.mark.parametrize("name", corpus.names())
def test_expected_verdicts_reproduce(name):
    e = corpus.load_example(name)
    rep = classify(e.system, e.multimetric, e.config)
    assert verdict_table(rep) == e.expected
    assert chain_violations(rep) == []
    for idx, expected in e.expected_subsystems.items():
        sub = classify(e.system.subsystem(idx), e.multimetric, e.config)
        assert verdict_table(sub) == expected


@pytest.mark.parametrize("box", [20.0, 40.0])
def test_larger_edelstein_boxes(box):
    e = corpus.load_example("edelstein_exp", box=box)
    rep = classify(e.system, e.multimetric, e.config)
    assert rep.status("edelstein") == "verified"
    assert verdict_table(rep) == e.expected


def test_oracles():
    fg = corpus.run_oracles(corpus.load_example("fg_interval"))
    assert fg["word_fg3_sup_distance"] == pytest.approx(1.0, abs=0.01)
    assert fg["single_letter_oscillation_t2"] == pytest.approx(1.0)
    assert fg["f_squared_range"] == [0.0, 0.0, 0.0]
    ed = corpus.run_oracles(corpus.load_example("edelstein_exp"))
    assert 6.5 <= ed["orbit_1000"] <= 7.5 and ed["orbit_1e6"] > 13
    ca = corpus.run_oracles(corpus.load_example("cantor"))
    assert all(0.30 <= r <= 0.36 for r in ca["residual_ratios"])
    si = corpus.run_oracles(corpus.load_example("sierpinski"))
    assert si["word_lipschitz_depth4"] == pytest.approx(1 / 16)
    assert si["remetrize_depth_eps1e-3"] == 12
    sw = corpus.run_oracles(corpus.load_example("swap_halve"))
    assert sw["lambda_m2"] == 0.5 and sw["a_m_lambda"] < 1 <= sw["a_bad_m_lambda"]
    pl = corpus.run_oracles(corpus.load_example("plane_two_coords"))
    assert pl["d1_hausdorff"] <= 0.01 and pl["d2_hausdorff"] <= 0.01
    assert pl["euclidean_hausdorff"] == pytest.approx(math.sqrt(2) / 2, abs=0.005)


def test_edelstein_orbit_oracle_grows_like_log():
    assert corpus.edelstein_orbit(0) == 0.0
    assert corpus.edelstein_orbit(1) == 1.0
    x = corpus.edelstein_orbit(10 ** 4)
    assert abs(x - math.log(10 ** 4)) < 1.0


def test_plane_fixture_sizes():
    sq, diag = corpus.plane_fixture(0.1)
    assert len(sq) == 121 and len(diag) == 11
    assert np.allclose(diag.points[:, 0], diag.points[:, 1])
