from fractions import Fraction

import numpy as np
import pytest
import sympy

from unramified.padic import (
    DegenerateSample,
    PadicPolynomial,
    count_generating_roots,
    disc_of_element,
    element_degree,
    frobenius,
    gr_context,
    inertial_count,
    is_prime,
    lowest_irreducible,
    orbit_size,
    phi,
    phi_relative,
    reciprocal,
    relative_disc_valuation,
    residue_table,
    teichmuller,
    vp,
)

CONFIGS = [(2, 2), (3, 2), (2, 3), (3, 3), (5, 2), (2, 4)]


def rng(seed=0):
    return np.random.default_rng(seed)


def test_small_number_theory():
    assert [k for k in range(30) if is_prime(k)] == [2, 3, 5, 7, 11, 13, 17, 19, 23, 29]
    assert vp(48, 2, 40) == 4
    assert vp(0, 3, 40) == 40


def test_modulus_choice():
    assert gr_context(2, 2, 20).modulus == (1, 1, 1)
    assert gr_context(3, 2, 20).modulus == (1, 0, 1)
    assert gr_context(3, 2, 20).modulus == lowest_irreducible(3, 2)
    assert len(gr_context(3, 1, 10).modulus) == 2


@pytest.mark.parametrize("p,n", CONFIGS + [(7, 3), (2, 6)])
def test_modulus_is_irreducible_mod_p(p, n):
    m = lowest_irreducible(p, n)
    assert m[-1] == 1 and len(m) == n + 1
    X = sympy.symbols("X")
    poly = sympy.Poly(list(reversed(m)), X, modulus=p)
    assert poly.is_irreducible
    # every residue-field element has degree dividing n
    F = gr_context(p, n, 8).residue_field
    assert all(n % F.degree(a) == 0 for a in range(F.q))


def test_invalid_contexts():
    with pytest.raises(ValueError, match="p must be prime"):
        gr_context(4, 2, 10)
    with pytest.raises(ValueError):
        gr_context(3, 0, 10)
    with pytest.raises(ValueError):
        gr_context(3, 2, 3)


@pytest.mark.parametrize("p,n", CONFIGS)
def test_frobenius_is_ring_automorphism_of_order_n(p, n):
    ctx = gr_context(p, n, 30)
    r = rng(p * 10 + n)
    for _ in range(50):
        x, y = ctx.random_element(r), ctx.random_element(r)
        assert frobenius(x + y) == frobenius(x) + frobenius(y)
        assert frobenius(x * y) == frobenius(x) * frobenius(y)
        assert frobenius(x, n) == x
        c = ctx.element(int(r.integers(0, 10 ** 6)))
        assert frobenius(c) == c


@pytest.mark.parametrize("p,n", CONFIGS)
def test_frobenius_lifts_p_power(p, n):
    ctx = gr_context(p, n, 20)
    g = ctx.generator()
    assert frobenius(g).residue() == (g ** p).residue()
    r = rng(1)
    for _ in range(20):
        x = ctx.random_element(r)
        assert frobenius(x).residue() == (x ** p).residue()


def test_frobenius_squared_is_identity_for_quadratic():
    ctx = gr_context(3, 2, 20)
    r = rng(2)
    for _ in range(100):
        x = ctx.random_element(r)
        assert frobenius(frobenius(x)) == x


def test_ring_axioms_and_inverse():
    ctx = gr_context(3, 3, 20)
    r = rng(3)
    for _ in range(50):
        x, y, z = (ctx.random_element(r) for _ in range(3))
        assert x * (y + z) == x * y + x * z
        assert (x * y) * z == x * (y * z)
        if x.valuation() == 0:
            assert x * x.inverse() == ctx.element(1)


def test_element_degree():
    ctx = gr_context(3, 2, 20)
    assert element_degree(ctx.element(7)) == 1
    g = ctx.generator()
    assert element_degree(g) == 2
    assert element_degree(g + 3 * ctx.element(5)) == 2
    # 1 + p^30 g agrees with 1 at this precision but is not provably in Z_p
    ctx40 = gr_context(3, 2, 40)
    x = ctx40.element(1) + ctx40.generator() * 3 ** 30
    assert orbit_size(x, 20) == 1
    assert element_degree(x) == 2


def test_teichmuller_lifts_are_fixed_by_their_degree():
    ctx = gr_context(2, 4, 20)
    F = ctx.residue_field
    for code in range(F.q):
        z = teichmuller(ctx, code)
        assert z.residue() == code
        assert frobenius(z, F.degree(code)) == z


@pytest.mark.parametrize("q,d,expected", [(3, 3, 24), (5, 2, 20), (7, 1, 7), (2, 4, 12)])
def test_inertial_count_closed_form(q, d, expected):
    assert inertial_count(q, d) == expected


@pytest.mark.parametrize("p,n", [(2, 2), (3, 3), (2, 4), (3, 2), (5, 2), (2, 6)])
def test_inertial_count_by_enumeration(p, n):
    F = gr_context(p, n, 8).residue_field
    counts = {}
    for a in range(F.q):
        k = F.degree(a)
        counts[k] = counts.get(k, 0) + 1
    for k, c in counts.items():
        assert inertial_count(p, k) == c


def test_disc_small_cases():
    ctx1 = gr_context(5, 1, 20)
    assert disc_of_element(ctx1.element(17)) == 0
    assert phi(ctx1.element(25)) == 1
    ctx = gr_context(3, 2, 20)
    g = ctx.generator()
    assert disc_of_element(g) == 0 and phi(g) == 1
    y = ctx.element((4, 7))
    assert disc_of_element(3 * y) == disc_of_element(y) + 2
    assert disc_of_element(ctx.element(5)) is None
    assert phi(ctx.element(5)) == 0


@pytest.mark.parametrize("p,n", CONFIGS)
def test_scaling_law_exact(p, n):
    ctx = gr_context(p, n, 40)
    r = rng(7)
    shift = n * (n - 1) // 2
    checked = 0
    for _ in range(1000):
        x = ctx.random_element(r)
        a, b = phi(x), phi(x * p)
        if a == 0 or b == 0:
            continue
        assert b == a / Fraction(p) ** shift
        checked += 1
    assert checked > 990


@pytest.mark.parametrize("p,n", CONFIGS)
def test_phi_invariant_under_unit_scaling_and_translation(p, n):
    ctx = gr_context(p, n, 40)
    r = rng(8)
    for _ in range(200):
        x = ctx.random_element(r)
        c = int(r.integers(1, 10 ** 9))
        if c % p == 0:
            c += 1
        assert phi(x * c) == phi(x)
        assert phi(x + int(r.integers(0, 10 ** 9))) == phi(x)


@pytest.mark.parametrize("p,n,m", [(3, 2, 1), (2, 2, 1), (2, 4, 2), (2, 4, 1), (3, 3, 1), (2, 6, 2), (2, 6, 3)])
def test_faithful_nonunit_spot_check(p, n, m):
    """disc(zeta + x) over Q_p matches the relative discriminant of x, rescaled by m."""
    ctx = gr_context(p, n, 40)
    F = ctx.residue_field
    zetas = [teichmuller(ctx, a) for a in range(F.q) if F.degree(a) == m][:3]
    r = rng(9)
    for zeta in zetas:
        for _ in range(30):
            x = ctx.random_element(r) * p
            lhs = disc_of_element(zeta + x)
            rel = relative_disc_valuation(x, m)
            if lhs is None or rel is None:
                continue
            assert lhs == m * rel
            assert phi(zeta + x) == phi_relative(x, m)


def test_roots_of_x_squared_minus_gx():
    ctx = gr_context(3, 2, 40)
    g = ctx.generator()
    f = PadicPolynomial((0, -g, 1), 3, 40)
    r = count_generating_roots(f, ctx)
    assert (r.count_ok, r.count_mk, r.count_outside, r.inconclusive) == (1, 0, 0, 0)
    assert r.roots[0] == g


def test_roots_of_conjugate_product():
    ctx = gr_context(3, 2, 40)
    g = ctx.generator() + 3 * ctx.element((2, 5))
    s = frobenius(g)
    f = PadicPolynomial((g * s, -(g + s), 1), 3, 40)
    assert f.has_rational_coeffs
    r = count_generating_roots(f, ctx, lift=True)
    assert r.count_ok == 2 and r.count_mk == 0 and r.inconclusive == 0
    assert set(r.roots) == {g, s}


def test_no_residue_roots_means_no_roots():
    ctx = gr_context(3, 2, 40)
    # 1 + 3 X: residue polynomial is a nonzero constant
    r = count_generating_roots(PadicPolynomial((1, 3, 0), 3, 40), ctx)
    assert (r.count_ok, r.count_mk, r.count_outside) == (0, 0, 0)


def test_degree_above_n_rejected():
    ctx = gr_context(2, 2, 40)
    with pytest.raises(ValueError):
        count_generating_roots(PadicPolynomial((1, 1, 0, 1), 2, 40), ctx)


def test_outside_roots_via_reciprocal():
    ctx = gr_context(3, 2, 40)
    g = ctx.generator()
    s = frobenius(g)
    # roots 1/(3g) and 1/(3s): reciprocal has roots 3g, 3s in the maximal ideal
    h = PadicPolynomial((9 * g * s, -3 * (g + s), 1), 3, 40)
    f = reciprocal(h)
    r = count_generating_roots(f, ctx)
    assert r.count_outside == 2 and r.count_ok == 0
    r2 = count_generating_roots(h, ctx)
    assert r2.count_ok == 2 and r2.count_mk == 2 and r2.count_outside == 0


def test_reciprocal_involution():
    f = PadicPolynomial((1, 2, 3), 5, 10)
    assert reciprocal(f).coeffs == (3, 2, 1)
    assert reciprocal(reciprocal(f)) == f


def test_degenerate_polynomial_rejected():
    ctx = gr_context(3, 2, 40)
    with pytest.raises(DegenerateSample):
        count_generating_roots(PadicPolynomial((0, 0, 0), 3, 40), ctx)


def _random_poly(r, p, n, M, monic=False):
    coeffs = [int(x) for x in r.integers(0, p ** min(M, 18), size=n + 1)]
    if monic:
        coeffs[-1] = 1
    return PadicPolynomial(tuple(coeffs), p, M)


@pytest.mark.parametrize("p,n", [(2, 2), (3, 2), (2, 3), (3, 3)])
def test_counts_invariant_under_unit_rescaling(p, n):
    ctx = gr_context(p, n, 40)
    r = rng(11)
    for _ in range(200):
        f = _random_poly(r, p, n, 40)
        c = int(r.integers(1, 10 ** 6))
        if c % p == 0:
            c += 1
        g = PadicPolynomial(tuple(c * a for a in f.coeffs), p, 40)
        a, b = count_generating_roots(f, ctx), count_generating_roots(g, ctx)
        assert (a.count_ok, a.count_mk, a.count_outside) == (b.count_ok, b.count_mk, b.count_outside)
        assert 0 <= a.count_mk <= a.count_ok <= n


@pytest.mark.parametrize("p,n", [(2, 2), (3, 2), (2, 3)])
def test_monic_has_no_outside_roots(p, n):
    ctx = gr_context(p, n, 40)
    r = rng(12)
    for _ in range(200):
        res = count_generating_roots(_random_poly(r, p, n, 40, monic=True), ctx)
        assert res.count_outside == 0


@pytest.mark.parametrize("p,n", [(2, 2), (3, 2), (2, 3)])
def test_lifted_roots_are_roots(p, n):
    ctx = gr_context(p, n, 40)
    r = rng(13)
    for _ in range(100):
        f = _random_poly(r, p, n, 40)
        res = count_generating_roots(f, ctx, lift=True)
        assert len(res.roots) == res.count_ok
        for x in res.roots:
            assert f(x).valuation() >= 30
            assert element_degree(x) == n


@pytest.mark.parametrize("p,n", [(2, 2), (3, 2), (2, 3), (5, 2)])
def test_residue_table_matches_full_search(p, n):
    ctx = gr_context(p, n, 40)
    table = residue_table(p, n, 40)
    r = rng(14)
    for code in range(p ** (n + 1)):
        if not table.resolved[code]:
            continue
        digits = [(code // p ** i) % p for i in range(n + 1)]
        for _ in range(3):
            noise = [int(x) * p for x in r.integers(0, p ** 10, size=n + 1)]
            f = PadicPolynomial(tuple(a + b for a, b in zip(digits, noise)), p, 40)
            res = count_generating_roots(f, ctx)
            assert (res.count_ok, res.count_mk) == (table.ok[code], table.mk[code])


def test_counts_against_brute_force_factorization():
    """Independent oracle for Z_p coefficients: f has a generating root iff it is
    (a unit times) an irreducible degree-n polynomial whose roots lie in K, which
    for n = 2 means irreducible over Q_p with unramified splitting field.  For
    p = 3, n = 2 we compare with sympy on polynomials with a unit discriminant."""
    p, n = 3, 2
    ctx = gr_context(p, n, 40)
    r = rng(15)
    seen = 0
    for _ in range(300):
        c0, c1, c2 = (int(x) for x in r.integers(-40, 40, size=3))
        disc = c1 * c1 - 4 * c0 * c2
        if c2 % p == 0 or disc % p == 0:
            continue
        res = count_generating_roots(PadicPolynomial((c0, c1, c2), p, 40), ctx)
        # a unit discriminant means the roots are distinct mod p; they generate K
        # exactly when the discriminant is a non-square mod p
        nonsquare = sympy.legendre_symbol(disc % p, p) == -1
        assert res.count_ok == (2 if nonsquare else 0)
        assert res.count_outside == 0
        seen += 1
    assert seen > 50
