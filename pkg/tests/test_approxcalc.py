import itertools
import math

import mpmath
import pytest

from artifact import approxcalc as ac
from artifact.params import CircuitParams, table_params


def test_delta_lsb():
    assert ac.delta_lsb(1e-40) < 1e-8
    assert ac.delta_lsb(2.0 ** -16) == pytest.approx(0.4375, rel=1e-15)
    assert ac.delta_lsb(1e-4) == pytest.approx(0.7, rel=1e-12)
    assert ac.delta_lsb(1e-4, sharp=True) == pytest.approx(6 * (math.pi * 1e-4 / 2) ** 0.25)
    with pytest.raises(ValueError):
        ac.delta_lsb(0.5)


def test_delta_V():
    assert ac.delta_V(1e-40, 1e-40) < 1e-8
    assert ac.delta_V(2.0 ** -16, 2.0 ** -17) == pytest.approx(0.875, rel=1e-15)
    assert ac.delta_V(2.0 ** -32, 2.0 ** -33) == pytest.approx(14 * 2.0 ** -8, rel=1e-15)
    with pytest.raises(ValueError):
        ac.delta_V(0.1, 0.25)


def test_delta_Vdag_mirrors_V():
    assert ac.delta_Vdag(2.0 ** -17, 2.0 ** -16) == pytest.approx(0.875, rel=1e-15)
    assert ac.delta_Vdag(2.0 ** -33, 2.0 ** -32) == pytest.approx(14 * 2.0 ** -8, rel=1e-15)
    assert ac.delta_Vdag(1e-40, 1e-40) < 1e-8
    with pytest.raises(ValueError):
        ac.delta_Vdag(0.25, 0.1)


def test_delta_VaNm():
    assert ac.delta_VaNm(1e-40, 1e-60, 4) < 1e-7
    assert ac.delta_VaNm(2.0 ** -32, 2.0 ** -40, 8) == pytest.approx(0.6875, rel=1e-15)
    assert ac.delta_VaNm(2.0 ** -16, 2.0 ** -20, 2) == pytest.approx(88 / 16 + 88 * 2.0 ** -4.5, rel=1e-14)
    with pytest.raises(ValueError):
        ac.delta_VaNm(0.01, 2.0 ** -10, 8)


def test_delta_UaNm_doubles():
    for eA, eC, m in ((2.0 ** -32, 2.0 ** -40, 8), (0.01, 1e-5, 3), (2.0 ** -16, 2.0 ** -20, 2)):
        v = ac.delta_VaNm(eA, eC, m)
        assert ac.delta_UaNm(eA, eC, m) == v + v


@pytest.mark.parametrize("n", [4, 6, 8, 12])
def test_delta_UaNm_table(n):
    p = table_params(2 ** n - 1)
    val = ac.delta_UaNm(mpmath.mpf(p.eps_A), mpmath.mpf(p.eps_C), p.m)
    assert float(val / (352 * mpmath.mpf(2) ** (-2 * n))) == pytest.approx(1.0, rel=1e-12)
    if n == 4:
        assert float(val) == pytest.approx(1.375, rel=1e-12)


def test_deltas_monotone():
    grid = [1e-8, 1e-6, 1e-4, 1e-3]
    for a, b in itertools.combinations(grid, 2):
        assert ac.delta_lsb(a) <= ac.delta_lsb(b)
        assert ac.delta_V(a, 1e-5) <= ac.delta_V(b, 1e-5)
        assert ac.delta_V(1e-5, a) <= ac.delta_V(1e-5, b)
        assert ac.delta_VaNm(a, 1e-9, 4) <= ac.delta_VaNm(b, 1e-9, 4)
        assert ac.delta_VaNm(1e-5, a * 1e-3, 4) <= ac.delta_VaNm(1e-5, b * 1e-3, 4)


def _spec(name, delta, eps=0.1):
    d = ac.Domain((ac.Region("Z", eps),))
    return ac.ApproxGateSpec(name, d, d, delta)


def test_compose():
    g = _spec("g", 0.1)
    assert ac.compose([g]) == g
    assert ac.compose([_spec("a", 0.1), _spec("b", 0.2)]).delta == pytest.approx(0.3)


def test_compose_associative():
    a, b, c = _spec("a", 0.1), _spec("b", 0.2), _spec("c", 0.05)
    left = ac.compose([ac.compose([a, b]), c])
    right = ac.compose([a, ac.compose([b, c])])
    assert left.delta == pytest.approx(right.delta) and left.domain == right.domain


def test_compose_rejects_mismatch():
    wide = _spec("wide", 0.1, eps=0.2)
    narrow = _spec("narrow", 0.1, eps=0.05)
    assert ac.compose([narrow, wide]).delta == pytest.approx(0.2)
    with pytest.raises(ac.DomainError):
        ac.compose([wide, narrow])


def test_region_containment():
    R = ac.Region
    assert R("zero", 0.1) <= R("N0", 0.1) <= R("Z", 0.1) <= R("R")
    assert not R("Z", 0.1) <= R("N0", 0.5)
    assert not R("N0", 0.2) <= R("N0", 0.1)
    assert R("R") <= R("Z", 0.5) and not R("R") <= R("Z", 0.4)
    assert not ac.Domain((R("Z", 0.1),), frozenset({0, 1})) <= ac.Domain((R("Z", 0.1),), frozenset({0}))


def test_lsb_then_U_domains():
    u = ac.UaNm_spec(2.0 ** -16, 2.0 ** -30, 4)
    assert ac.compose([u, u]).delta == pytest.approx(2 * u.delta)


@pytest.mark.parametrize("n", range(4, 17))
def test_stage_total_table(n):
    b = ac.stage_errors(table_params(2 ** n - 1), n)
    target = 364 * mpmath.mpf(2) ** (-2 * n)
    assert abs(b.total - target) / target <= 1e-12
    assert abs(b.total - sum(b.eps)) <= 1e-30 * target
    assert b.valid and b.table


def test_stage_total_examples():
    assert float(ac.stage_errors(table_params(255), 8).total) == pytest.approx(364 * 2.0 ** -16, rel=1e-12)
    assert float(ac.stage_errors(table_params(15), 4).total) == pytest.approx(364 / 256, rel=1e-12)


def test_stage_general_forms_below_closed_forms():
    for n in (4, 8, 12):
        b = ac.stage_errors(table_params(2 ** n - 1), n)
        assert all(g <= e for g, e in zip(b.general, b.eps))


def test_stage_errors_vanish_in_limit():
    tiny = mpmath.mpf(2) ** -400
    p = CircuitParams(m=4, R=2 ** 410, kappa_A=tiny, delta_A=tiny ** 2, kappa_B=tiny, delta_B=tiny ** 2,
                      delta_C=tiny ** 2, eps_A=tiny, eps_B=tiny, eps_C=tiny ** 2)
    b = ac.stage_errors(p, 4, 15)
    assert all(float(e) < 1e-20 for e in b.general)


def test_stage_errors_flags_small_n():
    b = ac.stage_errors(table_params(7), 3)
    assert not b.valid
    assert b.total > 0
