import math

import numpy as np
import pytest

from hutchfrac.errors import DimensionError, DomainEscape
from hutchfrac.metrics import Euclidean, SupNorm
from hutchfrac.spaces import (
    Affine, Builtin, Clamp1D, DomainBox, IfsSystem, analytic_edelstein, analytic_lipschitz,
    as_point, compose_word, enumerate_words, eval_map, eval_word, fixed_point,
)


def test_affine_halving():
    f = Affine(np.eye(2) / 2, [0, 0])
    assert np.allclose(eval_map(f, [1, 1]), [0.5, 0.5])


def test_clamp_is_max_zero_x_minus_one():
    f = Clamp1D(slope=1, shift=-1, lo=0, hi=2)
    assert eval_map(f, [0.3])[0] == 0.0
    assert eval_map(f, [1.7])[0] == pytest.approx(0.7)


def test_edelstein_builtin_at_zero():
    assert eval_map(Builtin("edelstein_exp"), [0.0])[0] == 1.0


def test_as_point_rejects_wrong_dim():
    with pytest.raises(DimensionError):
        as_point([1.0, 2.0], dim=3)


def test_box_grid_and_diameter():
    box = DomainBox([0, 0], [1, 1])
    assert box.diameter == pytest.approx(math.sqrt(2))
    assert len(box.corners()) == 4
    assert box.contains([0.5, 1.0]) and not box.contains([1.5, 0.0])


def test_empty_word_is_identity(fg):
    assert eval_word(fg, (), [1.3])[0] == 1.3


@pytest.mark.parametrize("n", [1, 2, 5])
def test_fg_alternating_word_is_min_one(fg, n):
    assert eval_word(fg, (0, 1) * n, [0.4])[0] == pytest.approx(0.4)
    assert eval_word(fg, (0, 1) * n, [1.6])[0] == pytest.approx(1.0)


@pytest.mark.parametrize("x", [0.0, 0.7, 1.3, 2.0])
def test_f_squared_is_constant(fg, x):
    assert eval_word(fg, (0, 0), [x])[0] == 0.0


def test_word_enumeration_counts(fg, sierpinski):
    assert enumerate_words(fg, 0) == [()]
    words = enumerate_words(fg, 3)
    assert len(words) == 8 and words == sorted(words)
    assert len(enumerate_words(sierpinski, 5)) == 243


def test_analytic_lipschitz_examples():
    halving = Affine(np.eye(2) / 2, [0, 0])
    assert analytic_lipschitz(halving, Euclidean()) == pytest.approx(0.5)
    swap = IfsSystem((Affine([[0, 1], [0.5, 0]], [0, 0]),), DomainBox([0, 0], [1, 1]))
    assert analytic_lipschitz(swap.maps[0], SupNorm()) == pytest.approx(1.0)
    assert analytic_lipschitz(compose_word(swap, (0, 0)), SupNorm()) == pytest.approx(0.5)
    edel = Builtin("edelstein_exp")
    box = DomainBox([0], [10])
    assert analytic_lipschitz(edel, Euclidean(), box) == pytest.approx(-math.expm1(-10))
    assert analytic_edelstein(edel, Euclidean(), box) is True


def test_fixed_point_of_sierpinski_maps(sierpinski):
    vertices = [(0, 0), (1, 0), (0, 1)]
    for f, v in zip(sierpinski.maps, vertices):
        assert np.allclose(fixed_point(f, [0.3, 0.3]), v, atol=1e-12)


def test_declared_self_map_escape_is_reported():
    with pytest.raises(DomainEscape):
        IfsSystem((Affine([[2.0]], [0.0]),), DomainBox([0], [1]))
