import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qclt.characters import (
    UnitRoot,
    batch_twisted_sums,
    build_group,
    character_values,
    gauss_sum,
    gauss_sums_all,
    twisted_sums_direct,
    value_table,
)

# ---------------------------------------------------------------------------
# oracles


def phi_brute(q):
    return sum(1 for n in range(1, q + 1) if math.gcd(n, q) == 1) if q > 1 else 1


def conductor_brute(chi):
    """Smallest f | q with chi trivial on the kernel of reduction mod f."""
    q = chi.group.q
    for f in sorted(d for d in range(1, q + 1) if q % d == 0):
        if all(
            abs(chi(n) - 1) < 1e-9
            for n in range(1, q + 1)
            if n % f == 1 % f and math.gcd(n, q) == 1
        ):
            return f
    return q


def mu_trial(n):
    out, d = 1, 2
    while d * d <= n:
        if n % d == 0:
            n //= d
            if n % d == 0:
                return 0
            out = -out
        d += 1
    return -out if n > 1 else out


# ---------------------------------------------------------------------------


def test_build_group_small_structures():
    g5 = build_group(5)
    assert g5.phi == 4 and g5.orders == (4,)
    g8 = build_group(8)
    assert g8.phi == 4 and sorted(g8.orders) == [2, 2]
    g45 = build_group(45)
    assert g45.phi == phi_brute(45) == 24
    for q in range(1, 120):
        assert build_group(q).phi == phi_brute(q)


def test_build_group_rejects_zero():
    with pytest.raises(ValueError):
        build_group(0)
    with pytest.raises(ValueError):
        build_group(-4)


def test_principal_character():
    for q in (1, 2, 5, 12, 45):
        chi0 = build_group(q).character(0)
        assert chi0.is_principal
        for n in range(1, 30):
            expected = 1.0 if math.gcd(n, q) == 1 else 0.0
            assert abs(chi0(n) - expected) < 1e-12


def test_mod4_even_vanishes():
    chi = build_group(4).character(1)
    for n in range(0, 20, 2):
        assert chi(n) == 0


def test_order4_character_mod5():
    # dlog base 2: 2^1=2, 2^2=4, 2^3=3; chi(2)=i forces chi(3)=-i, chi(4)=-1
    g = build_group(5)
    chis = [chi for chi in g.characters() if abs(chi(2) - 1j) < 1e-12]
    assert len(chis) == 1
    chi = chis[0]
    assert abs(chi(3) - (-1j)) < 1e-12
    assert abs(chi(4) - (-1.0)) < 1e-12


def test_evaluate_exact_unit_roots():
    g = build_group(45)
    for chi in g.characters():
        for n in (1, 2, 7, 44, 46):
            root = chi.evaluate_exact(n)
            if math.gcd(n, 45) != 1:
                assert root is None
                continue
            assert 0 <= root.num < root.den
            assert g.exponent % root.den == 0
            assert abs(root.value() - chi(n)) < 1e-12
    assert build_group(45).character(5).evaluate_exact(15) is None


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 3), st.integers(0, 3), st.integers(1, 40), st.integers(1, 40))
def test_unit_root_arithmetic(n1, n2, d1, d2):
    r1, r2 = UnitRoot(n1, d1), UnitRoot(n2, d2)
    assert abs((r1 * r2).value() - r1.value() * r2.value()) < 1e-12
    assert abs(r1.conj().value() - r1.value().conjugate()) < 1e-12


def test_multiplicativity_random(rng):
    for q in (12, 45, 101):
        g = build_group(q)
        for chi in list(g.characters())[:: max(1, g.phi // 6)]:
            m = rng.integers(1, 10**6, size=200)
            n = rng.integers(1, 10**6, size=200)
            lhs = character_values(chi, m * n)
            rhs = character_values(chi, m) * character_values(chi, n)
            assert np.max(np.abs(lhs - rhs)) < 1e-12


def test_parity_all_small_q():
    for q in range(3, 201):
        g = build_group(q)
        parities = g.parities()
        for chi in g.characters():
            assert abs(chi(q - 1) - (-1.0) ** parities[chi.index]) < 1e-12


def test_conductor_examples():
    g8 = build_group(8)
    # chi0 mod q > 1: conductor 1, not primitive
    assert g8.character(0).conductor == 1 and not g8.character(0).is_primitive
    g4 = build_group(4)
    chi4 = g4.character(1)
    assert chi4.conductor == 4 and chi4.is_primitive
    # the character mod 8 induced from the mod-4 character has conductor 4
    induced = [
        chi for chi in g8.characters() if chi.conductor == 4
    ]
    assert induced, "expected an induced mod-8 character of conductor 4"
    for chi in induced:
        assert conductor_brute(chi) == 4


def test_conductor_matches_brute_force():
    qs = list(range(1, 61)) + [72, 80, 96, 100, 120, 128, 144, 180, 200]
    for q in qs:
        g = build_group(q)
        for chi in g.characters():
            assert chi.conductor == conductor_brute(chi), (q, chi.index)


def test_primitive_count_formula():
    for q in range(1, 201):
        g = build_group(q)
        expected = sum(
            mu_trial(q // f) * phi_brute(f) for f in range(1, q + 1) if q % f == 0
        )
        assert len(g.primitive_indices()) == expected, q


def test_gauss_sum_mod4():
    chi4 = build_group(4).character(1)
    # 4-term oracle: sum chi(x) e^{2 pi i x / 4}
    direct = sum(chi4(x) * cmath.exp(2j * math.pi * x / 4) for x in range(4))
    assert abs(direct - 2j) < 1e-12
    assert abs(gauss_sum(chi4) - 2j) < 1e-12


def test_gauss_sum_modulus_primitive_small():
    for q in range(3, 51):
        g = build_group(q)
        taus = gauss_sums_all(g)
        for i in g.primitive_indices():
            chi = g.character(int(i))
            tau = gauss_sum(chi)
            assert abs(tau - taus[i]) < 1e-9
            assert abs(abs(tau) ** 2 - q) < 1e-9


def test_gauss_sum_principal_prime():
    for p in (3, 5, 7, 11, 13):
        tau = gauss_sum(build_group(p).character(0))
        assert abs(tau - (-1.0)) < 1e-12


def test_batch_delta_one():
    for q in (5, 12, 101):
        g = build_group(q)
        out = batch_twisted_sums({1: 1.0}, g)
        assert np.max(np.abs(out - 1.0)) < 1e-12


def test_batch_orthogonality_recovery(rng):
    # indicator of n = a (mod q) pushed through all chi, then averaged
    # against conj(chi(b)), recovers phi(q) [a = b]
    for q in (7, 12, 30):
        g = build_group(q)
        table = value_table(g)
        for a in range(1, q):
            if math.gcd(a, q) != 1:
                continue
            n = np.arange(a, 30 * q, q, dtype=np.int64)
            sums = batch_twisted_sums((n, np.ones(n.size)), g)
            for b in (1, a):
                avg = np.sum(np.conj(table[:, b]) * sums) / n.size
                expected = g.phi if (a - b) % q == 0 else 0.0
                assert abs(avg - expected) < 1e-9


def test_batch_matches_direct_oracle(rng):
    g = build_group(101)
    idx = rng.integers(1, 5000, size=200)
    vals = rng.normal(size=200) + 1j * rng.normal(size=200)
    coeffs = dict(zip(map(int, idx), map(complex, vals)))
    batch = batch_twisted_sums(coeffs, g)
    direct = twisted_sums_direct(coeffs, g)
    scale = np.max(np.abs(direct))
    assert np.max(np.abs(batch - direct)) / scale < 1e-10


def test_batch_rejects_bad_indices():
    g = build_group(7)
    with pytest.raises(ValueError):
        batch_twisted_sums({0: 1.0}, g)


def test_conjugate_indices():
    for q in (5, 8, 45, 101):
        g = build_group(q)
        conj = g.conj_indices()
        for chi in g.characters():
            cbar = chi.conj()
            assert conj[chi.index] == cbar.index
            for n in (2, 3, 7):
                assert abs(cbar(n) - chi(n).conjugate()) < 1e-12


def test_enumeration_deterministic():
    a = build_group(45)
    b = build_group(45)
    assert [chi.expo for chi in a.characters()] == [chi.expo for chi in b.characters()]
    ta = value_table(a)
    tb = value_table(b)
    assert np.array_equal(ta, tb)


def test_value_table_orthogonality_exact():
    for q in (12, 45):
        g = build_group(q)
        V = value_table(g)
        gram = V.conj().T @ V
        for n in range(q):
            for m in range(q):
                expected = g.phi if (n == m and math.gcd(n, q) == 1) else 0.0
                assert abs(gram[m, n] - expected) < 1e-9
