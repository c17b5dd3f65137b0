import math
from fractions import Fraction

import numpy as np
import pytest

from ntrucvp.attack import build_M_a, choose_a
from ntrucvp.lattice import (
    DependentRowsError,
    DimensionMismatchError,
    LatticeBasis,
    PrecisionError,
    RankTooLargeError,
    ReductionParams,
    babai_nearest_plane,
    brute_force_closest,
    cvp_exact,
    enumerate_ball,
    gram_schmidt,
    is_lll_reduced,
    iter_small_combinations,
    lll_reduce,
    lll_reduce_with_transform,
    prepare_enum,
    random_unimodular,
    same_lattice,
    svp_exact,
)
from ntrucvp.ring import ConvPoly

EXACT = ReductionParams(precision="exact")


def random_basis(n, rng, lo=-9, hi=10):
    while True:
        B = rng.integers(lo, hi, size=(n, n)).tolist()
        if LatticeBasis(B).det() != 0:
            return LatticeBasis(B)


# --- basics

def test_basis_validation():
    with pytest.raises(DimensionMismatchError):
        LatticeBasis([[1, 2], [3]])
    B = LatticeBasis([[1, 2], [3, 4]])
    assert B.det() == -2 and B.volume2() == 4
    assert B.contains([4, 6]) and B.contains([1, 0]) and not B.contains([1, 1])
    assert B.combine([1, 1]) == [4, 6]


def test_gso_identity():
    g = gram_schmidt(LatticeBasis([[1, 0, 0], [0, 1, 0], [0, 0, 1]]), EXACT)
    assert (g.mu == np.eye(3, dtype=object)).all()
    assert list(g.norms) == [1, 1, 1]


@pytest.mark.parametrize("precision", ["exact", "float"])
def test_gso_two_by_two(precision):
    g = gram_schmidt(LatticeBasis([[1, 1], [0, 2]]), ReductionParams(precision=precision))
    assert np.allclose([float(x) for x in g.bstar[0]], [1, 1])
    assert math.isclose(float(g.mu[1, 0]), 1)
    assert np.allclose([float(x) for x in g.bstar[1]], [-1, 1])


@pytest.mark.parametrize("seed", range(5))
def test_gso_volume_and_reconstruction(seed):
    rng = np.random.default_rng(seed)
    B = random_basis(6, rng)
    g = gram_schmidt(B, EXACT)
    assert math.prod(g.norms) == B.det() ** 2
    for i in range(6):
        rebuilt = [sum(g.mu[i, j] * g.bstar[j][c] for j in range(i + 1)) for c in range(6)]
        assert rebuilt == B.rows[i]
        for j in range(i):
            assert sum(g.bstar[i][c] * g.bstar[j][c] for c in range(6)) == 0
    gf = gram_schmidt(B)
    assert np.allclose(gf.norms, [float(x) for x in g.norms])


def test_dependent_rows():
    with pytest.raises(DependentRowsError):
        gram_schmidt(LatticeBasis([[1, 2], [2, 4]]), EXACT)


# --- LLL

def test_lll_identity_unchanged():
    I = LatticeBasis([[1, 0], [0, 1]])
    assert lll_reduce(I) == I


@pytest.mark.parametrize("precision", ["exact", "float"])
def test_lll_small_example(precision):
    red = lll_reduce(LatticeBasis([[1, 0], [4, 1]]), ReductionParams(precision=precision))
    assert sum(v * v for v in red.rows[0]) == 1
    assert is_lll_reduced(red)


@pytest.mark.parametrize("precision", ["exact", "float"])
@pytest.mark.parametrize("seed", range(4))
def test_lll_contract_on_M_a(precision, seed):
    rng = np.random.default_rng(seed)
    a = choose_a("uniform", 10, 32, 2.0, rng)
    B = build_M_a(a, 32)
    red, U = lll_reduce_with_transform(B, ReductionParams(precision=precision))
    assert is_lll_reduced(red, 0.99)
    assert same_lattice(B, red)
    assert abs(red.det()) == 32**10
    assert [B.combine(u) for u in U] == red.rows


def test_lll_float_and_exact_agree_on_quality():
    rng = np.random.default_rng(11)
    B = random_basis(8, rng, -50, 51)
    for p in ("exact", "float"):
        assert is_lll_reduced(lll_reduce(B, ReductionParams(precision=p)))


def test_reduction_params_validation():
    with pytest.raises(ValueError):
        ReductionParams(delta=0.2)
    with pytest.raises(ValueError):
        ReductionParams(precision="quad")


def test_huge_entries_need_exact_mode():
    B = LatticeBasis([[2**40, 1], [2**40 + 1, 1]])
    with pytest.raises(PrecisionError):
        lll_reduce(B)
    red = lll_reduce(B, EXACT)
    assert same_lattice(B, red) and is_lll_reduced(red)


# --- Babai

def test_babai_lattice_point():
    B = LatticeBasis([[3, 1], [1, 2]])
    g = gram_schmidt(B)
    assert babai_nearest_plane(B, g, [4, 3]) == [4, 3]


def test_babai_on_Zn_rounds():
    B = LatticeBasis([[1, 0], [0, 1]])
    assert babai_nearest_plane(B, gram_schmidt(B), [3, 7]) == [3, 7]


def test_babai_tie_toward_zero():
    B = LatticeBasis([[2, 0], [0, 2]])
    assert babai_nearest_plane(B, gram_schmidt(B), [1, 1]) == [0, 0]
    assert babai_nearest_plane(B, gram_schmidt(B), [-1, -3]) == [0, -2]


def test_babai_dimension_mismatch():
    B = LatticeBasis([[1, 0], [0, 1]])
    with pytest.raises(DimensionMismatchError):
        babai_nearest_plane(B, gram_schmidt(B), [1, 2, 3])


@pytest.mark.parametrize("seed", range(10))
def test_babai_bound_and_membership(seed):
    rng = np.random.default_rng(seed)
    B = lll_reduce(random_basis(7, rng))
    g = gram_schmidt(B)
    t = rng.integers(-100, 100, size=7).tolist()
    w = babai_nearest_plane(B, g, t)
    assert B.contains(w)
    assert sum((a - b) ** 2 for a, b in zip(w, t)) <= sum(g.norms) / 4 + 1e-9
    assert sum((a - b) ** 2 for a, b in zip(cvp_exact(B, t), t)) <= sum((a - b) ** 2 for a, b in zip(w, t))


# --- exact SVP / CVP

def test_svp_trivial():
    assert svp_exact(LatticeBasis(np.eye(4, dtype=int)))[1] == 1
    assert svp_exact(LatticeBasis(32 * np.eye(4, dtype=int)))[1] == 32


def test_svp_zero_a_gives_unit_vector():
    v, lam = svp_exact(build_M_a(ConvPoly.zero(5), 32))
    assert lam == 1 and sum(map(abs, v)) == 1


def test_cvp_trivial():
    Z2 = LatticeBasis([[1, 0], [0, 1]])
    assert cvp_exact(Z2, [5, -2]) == [5, -2]
    B = LatticeBasis([[3, 1], [1, 2]])
    assert cvp_exact(B, [4, 3]) == [4, 3]


def test_cvp_tie_is_lexicographic_in_input_coefficients():
    # target (1, 1) is equidistant from (0,0), (2,0), (0,2), (2,2)
    # coefficient vectors (0,0), (1,0), (0,1), (1,1): the first is smallest
    assert cvp_exact(LatticeBasis([[2, 0], [0, 2]]), [1, 1]) == [0, 0]
    # with rows listed as (-2, 0), (0, -2) the candidates are (-1,-1), (-1,0), (0,-1), (0,0)
    assert cvp_exact(LatticeBasis([[-2, 0], [0, -2]]), [1, 1]) == [2, 2]


def test_rank_cap():
    with pytest.raises(RankTooLargeError):
        svp_exact(LatticeBasis(np.eye(61, dtype=int)))


@pytest.mark.parametrize("seed", range(6))
def test_svp_cvp_match_brute_force(seed):
    rng = np.random.default_rng(100 + seed)
    n = int(rng.integers(2, 6))
    B = lll_reduce(random_basis(n, rng))
    v, lam = svp_exact(B)
    r = math.sqrt(min(sum(x * x for x in row) for row in B.rows))
    assert brute_force_closest(B, None, r)[0] == round(lam * lam)
    t = rng.integers(-30, 30, size=n).tolist()
    w = cvp_exact(B, t)
    d2 = sum((a - b) ** 2 for a, b in zip(w, t))
    assert brute_force_closest(B, t, math.sqrt(d2) + 1e-9)[0] == d2


def test_svp_not_beaten_by_random_combinations():
    rng = np.random.default_rng(4)
    B = lll_reduce(random_basis(10, rng))
    _, lam = svp_exact(B)
    for x in iter_small_combinations(10, rng, 1000, bound=2):
        assert sum(c * c for c in B.combine(x)) >= round(lam * lam)


def test_svp_basis_independent():
    rng = np.random.default_rng(9)
    B = random_basis(6, rng)
    B2 = LatticeBasis(np.array(random_unimodular(6, rng), dtype=object) @ np.array(B.rows, dtype=object))
    assert same_lattice(B, B2)
    assert svp_exact(B)[1] == svp_exact(B2)[1]


def test_block_preprocessing_keeps_the_lattice():
    # rank 36 triggers the block pass before enumeration
    rng = np.random.default_rng(0)
    a = choose_a("uniform", 18, 32, 1.5, rng)
    B = build_M_a(a, 32)
    ctx = prepare_enum(B)
    assert [B.combine(u) for u in ctx.U] == ctx.reduced.rows
    assert abs(ctx.reduced.det()) == 32**18
    v, lam = svp_exact(ctx)
    assert B.contains(v) and sum(x * x for x in v) == round(lam * lam)


def test_enumerate_ball_counts_Z2():
    res = enumerate_ball(LatticeBasis([[1, 0], [0, 1]]), math.sqrt(2))
    # one of each +- pair: (1,0), (0,1), (1,1), (1,-1)
    assert len(res.vectors) == 4 and sorted(res.dist2) == [1, 1, 2, 2]


def test_context_reuse_matches_fresh():
    rng = np.random.default_rng(3)
    B = random_basis(8, rng)
    ctx = prepare_enum(B)
    for _ in range(5):
        t = rng.integers(-40, 40, size=8).tolist()
        assert cvp_exact(ctx, t) == cvp_exact(B, t)


def test_fraction_inputs_to_round():
    from ntrucvp.lattice import _round_half_to_zero

    assert _round_half_to_zero(Fraction(1, 2)) == 0
    assert _round_half_to_zero(Fraction(-1, 2)) == 0
    assert _round_half_to_zero(Fraction(3, 2)) == 1
    assert _round_half_to_zero(Fraction(-3, 2)) == -1
    assert _round_half_to_zero(Fraction(7, 10)) == 1
