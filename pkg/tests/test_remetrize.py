import dataclasses
import math

import numpy as np
import pytest

from hutchfrac import corpus
from hutchfrac.errors import RemetrizationError
from hutchfrac.metrics import Cloud, Coordinate, Euclidean, SupNorm
from hutchfrac.remetrize import (
    BanachPowerMetric, build_banach_power, build_remetrized, check_alphas, default_alpha,
    hull_samples, rhat_eval, verify_banach_under, verify_edelstein_under,
    verify_krasnoselskii_under,
)
from hutchfrac.spaces import Affine, DomainBox, IfsSystem


@pytest.fixture(scope="module")
def sier_rm():
    entry = corpus.load_example("sierpinski")
    K = Cloud(np.array(entry.options["remetrize"]["invariant_cloud"], float))
    return build_remetrized(entry.system, Euclidean(), K=K, eps=1e-3)


@pytest.fixture(scope="module")
def swap():
    return corpus.load_example("swap_halve").system


def test_default_alphas():
    assert default_alpha(0) == 1.0
    assert [default_alpha(n) for n in range(4)] == [1.0, 1.5, 1.75, 1.875]
    with pytest.raises(ValueError):
        check_alphas(lambda n: 2.0 ** -n, 5)


def test_sierpinski_depth(sier_rm):
    assert sier_rm.depth == 12
    assert 2 * 2.0 ** -12 * math.sqrt(2) < 1e-3 <= 2 * 2.0 ** -11 * math.sqrt(2)
    assert sier_rm.tail_bound < 1e-3


def test_identity_system_is_refused():
    ident = IfsSystem((Affine([[1.0]], [0.0]),), DomainBox([0], [1]))
    with pytest.raises(RemetrizationError):
        build_remetrized(ident, Euclidean(), K=Cloud(np.array([[0.0], [1.0]])), eps=0.1)


def test_fg_is_refused_naming_a_word(fg):
    with pytest.raises(RemetrizationError, match="fg"):
        build_remetrized(fg, Euclidean(), K=Cloud(np.array([[0.0], [2.0]])), eps=0.1)


def test_rhat_examples(sier_rm):
    assert rhat_eval(sier_rm, [0.2, 0.3], [0.2, 0.3])[0] == 0
    val, err = rhat_eval(sier_rm, [0, 0], [1, 0])
    assert 1.0 <= val <= 2 * math.sqrt(2) + 1e-3
    assert err == sier_rm.tail_bound
    assert rhat_eval(sier_rm.truncated(0), [0, 0], [1, 0])[0] == pytest.approx(1.0)


def test_rhat_is_monotone_in_depth(sier_rm):
    rng = np.random.default_rng(3)
    X, Y = rng.random((50, 2)), rng.random((50, 2))
    prev = np.zeros(50)
    for k in range(sier_rm.depth + 1):
        cur = sier_rm.truncated(k).paired(X, Y)
        assert np.all(cur >= prev - 1e-12)
        prev = cur


def test_rhat_sandwich(sier_rm):
    K = sier_rm.invariant_cloud
    rng = np.random.default_rng(0)
    X, Y = hull_samples(K, 500, rng), hull_samples(K, 500, rng)
    rh = sier_rm.paired(X, Y)
    assert np.all(Euclidean().paired(X, Y) <= rh + 1e-12)
    assert np.all(rh <= 2 * sier_rm.hull_diameter() + sier_rm.tail_bound)


def test_edelstein_under_rhat(sier_rm):
    rep = verify_edelstein_under(sier_rm, pair_samples=500, seed=0)
    assert rep.ok and rep.checked + rep.skipped == 500


def test_edelstein_negative_control(swap):
    rm = build_remetrized(swap, Coordinate(1), K=Cloud(swap.domain.corners()), eps=1e-3)
    assert verify_edelstein_under(rm, pair_samples=500).ok
    bad = dataclasses.replace(rm, alphas=lambda n: 2.0 ** -n)
    assert verify_edelstein_under(bad, pair_samples=500).violations


def test_krasnoselskii_under_rhat(sier_rm):
    rep = verify_krasnoselskii_under(sier_rm, a_low=0.01, b_high=3.0, pair_samples=500)
    assert rep.sup_ratio < 1.0 and rep.lambda_bound < 1.0


def test_krasnoselskii_singleton_halving():
    halving = IfsSystem((Affine([[0.5]], [0.0]),), DomainBox([0], [1]))
    rm = build_remetrized(halving, Euclidean(), K=Cloud(np.array([[0.0], [1.0]])), eps=1e-6)
    rep = verify_krasnoselskii_under(rm, a_low=0.01, b_high=3.0, pair_samples=300)
    assert rep.sup_ratio < 1.0


def test_banach_power_contract(swap):
    bp = build_banach_power(swap, SupNorm(), m=2, a=1.2)
    assert bp.lam == 0.5 and 1.2 ** 2 * bp.lam < 1
    rep = verify_banach_under(bp, pair_samples=500, seed=0)
    assert rep.ok and rep.max_ratio <= 1 / 1.2 + 1e-6
    assert bp.paired(np.array([[0.3, 0.4]]), np.array([[0.3, 0.4]]))[0] == 0


def test_banach_power_refuses_large_base(swap):
    with pytest.raises(RemetrizationError):
        build_banach_power(swap, SupNorm(), m=2, a=1.5)


def test_banach_power_negative_control(swap):
    bad = BanachPowerMetric(SupNorm(), swap, 2, 0.5, 1.5, 40)
    assert verify_banach_under(bad, pair_samples=500, seed=0).violations


def test_banach_power_with_m_one():
    halving = IfsSystem((Affine(np.eye(2) / 2, [0, 0]),), DomainBox([0, 0], [1, 1]))
    bp = build_banach_power(halving, Euclidean(), m=1, a=1.5)
    assert verify_banach_under(bp, pair_samples=200).ok
    x, y = np.array([[0.0, 0.0]]), np.array([[1.0, 0.0]])
    assert bp.paired(x, y)[0] >= 1.0
