"""The rational functions D_n(u, v) and D*_n(t) and the probabilities built from them.

``d(n)`` is the production path (the divisor recursion).  ``d_chain_form`` and
``d_subset_form`` compute the same function through chain sums and through
restricted inverses of the θ polynomial; they exist to cross-check each other.
"""

from __future__ import annotations

import itertools
import math
import threading
from dataclasses import dataclass
from fractions import Fraction
from math import comb

from .exact import LaurentPoly, PoleError, RationalFunction, polynomial_ring
from .incidence import DivisorPoset, chains, inv_theta, is_prime, mobius, specialize_u

UV = ("u", "v")
T = ("t",)
_S = ("s",)


def _u_pow(a: int, b: int = 0, c=1) -> LaurentPoly:
    """``c * u^a * v^b``."""
    return LaurentPoly(UV, [({"u": a, "v": b}, c)])


def theta_u(n: int, d: int, e: int) -> LaurentPoly:
    """``theta(d, e; u) = sum_{d | f | e} mu(e / f) u^(f - d)`` inside the divisors of ``n``."""
    P = DivisorPoset(n)
    mu = mobius(P)
    return LaurentPoly(UV, [({"u": f - d}, mu(f, e)) for f in P.interval(d, e)])


class DFamily:
    """Memoized ``D_n``.  Safe for concurrent readers; a racing fill just recomputes."""

    def __init__(self):
        self._cache: dict[int, RationalFunction] = {1: RationalFunction.const(UV, 1)}
        self._star: dict[int, RationalFunction] = {}
        self._lock = threading.Lock()

    def __call__(self, n: int) -> RationalFunction:
        return self.d(n)

    def d(self, n: int) -> RationalFunction:
        if not isinstance(n, int) or n < 1:
            raise ValueError("n must be a positive integer")
        hit = self._cache.get(n)
        if hit is not None:
            return hit
        for m in DivisorPoset(n).order[:-1]:
            self.d(m)
        value = self._recursion(n)
        with self._lock:
            return self._cache.setdefault(n, value)

    def _recursion(self, n: int) -> RationalFunction:
        P = DivisorPoset(n)
        total = RationalFunction.const(UV, 0)
        for d in P.order[1:]:
            inner = self._cache[n // d].substitute({"u": _u_pow(d), "v": _u_pow(0, 1)})
            # sum_{e | d} mu(d / e) u^(e - 1)
            weight = theta_u(d, 1, d) * _u_pow(0, n // d - 1)
            total = total + inner * weight
        denom = _u_pow(n - 1) - _u_pow(0, n - 1)
        return (total / denom).cancel()

    def d_star(self, n: int) -> RationalFunction:
        hit = self._star.get(n)
        if hit is not None:
            return hit
        value = _d_star(self.d(n), n)
        with self._lock:
            return self._star.setdefault(n, value)

    def cached(self) -> list[int]:
        return sorted(self._cache)


_FAMILY = DFamily()


def d(n: int) -> RationalFunction:
    """``D_n(u, v)`` from the divisor recursion."""
    return _FAMILY.d(n)


def d_star(n: int) -> RationalFunction:
    """``D*_n(t) = D_n(t, t^(-n/2)) / n``, reduced to lowest terms in ``t``."""
    return _FAMILY.d_star(n)


# -- D*_n ---------------------------------------------------------------------


def _cyclotomic(k: int, cache: dict = {}) -> list[int]:
    """Dense integer coefficients (constant first) of the ``k``-th cyclotomic polynomial."""
    hit = cache.get(k)
    if hit is None:
        hit = [-1] + [0] * (k - 1) + [1]
        for j in range(1, k):
            if k % j == 0:
                hit = _dense_divexact(hit, _cyclotomic(j))
        cache[k] = hit
    return hit


def _dense_divexact(a: list, b: list) -> list | None:
    """Exact quotient of dense polynomials with ``b`` monic, or ``None``."""
    a = list(a)
    db = len(b) - 1
    if len(a) - 1 < db:
        return None if any(a) else []
    support = [(i, c) for i, c in enumerate(b[:-1]) if c]
    q = [0] * (len(a) - db)
    for i in range(len(q) - 1, -1, -1):
        c = a[i + db]
        if c:
            q[i] = c
            for j, bj in support:
                a[i + j] -= c * bj
    return q if not any(a[:db]) else None


def _dense_mul(a: list, b: list) -> list:
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                if y:
                    out[i + j] += x * y
    return out


def _binomial_exponent(f: LaurentPoly) -> int | None:
    """``k`` when ``f == s^k - 1`` exactly, else ``None``."""
    if len(f) != 2 or f.coefficient(()) != -1:
        return None
    (mono, c), = [(m, c) for m, c in f.terms.items() if m]
    return mono[0][1] if c == 1 else None


def _d_star(dn: RationalFunction, n: int) -> RationalFunction:
    s = LaurentPoly.var(_S, "s")
    sub = dn.substitute({"u": s ** 2, "v": s ** -n}, _S)
    den_factors: dict[int, int] = {}
    for f, mult in sub.factors:
        k = _binomial_exponent(f)
        if k is None:
            raise RuntimeError(f"unexpected denominator factor {f} in D*_{n}")
        for j in range(1, k + 1):
            if k % j == 0:
                den_factors[j] = den_factors.get(j, 0) + mult
    # dense integer numerator: s^low * scale^-1 * sum num[i] s^i
    exps = {(m[0][1] if m else 0): c for m, c in sub.num.terms.items()}
    low = min(exps)
    scale = math.lcm(*(Fraction(c).denominator for c in exps.values()))
    num = [0] * (max(exps) - low + 1)
    for e, c in exps.items():
        num[e - low] = int(c * scale)
    for j in sorted(den_factors):
        phi = _cyclotomic(j)
        while den_factors[j]:
            q = _dense_divexact(num, phi)
            if q is None:
                break
            num = q
            den_factors[j] -= 1
    den = [1]
    for j, mult in den_factors.items():
        for _ in range(mult):
            den = _dense_mul(den, _cyclotomic(j))
    # move the monomial factor to whichever side keeps both exponents non-negative
    shift = low + next(i for i, c in enumerate(num) if c)
    num = num[shift - low:]
    if shift >= 0:
        num = [0] * shift + num
    else:
        den = [0] * -shift + den
    parities = {i % 2 for part in (num, den) for i, c in enumerate(part) if c}
    if parities != {0}:
        raise RuntimeError(f"D*_{n} is not a rational function of t")

    def to_t(coeffs: list, c=1) -> LaurentPoly:
        return LaurentPoly(T, [({"t": i // 2}, Fraction(a) * c) for i, a in enumerate(coeffs) if a])

    return RationalFunction(to_t(num, Fraction(1, n * scale)), to_t(den))


def has_only_integer_t_powers(n: int) -> bool:
    """True when ``D_n(s^2, s^-n)`` reduces to a function of ``t = s^2``."""
    try:
        d_star(n)
    except RuntimeError:
        return False
    return True


# -- alternative forms --------------------------------------------------------


def d_chain_form(n: int) -> RationalFunction:
    """Sum over proper chains ``1 = d_0 < ... < d_k = n`` of
    ``prod v^(n/d_{i+1}) theta(d_i, d_{i+1}; u) / (u^(n - d_i) v - v^(n / d_i))``."""
    if n < 1:
        raise ValueError("n must be a positive integer")
    if n == 1:
        return RationalFunction.const(UV, 1)
    P = DivisorPoset(n)
    total = RationalFunction.const(UV, 0)
    for k in range(1, len(P)):
        for c in chains(P, 1, n, k):
            num = LaurentPoly.const(UV, 1)
            factors = []
            for a, b in zip(c, c[1:]):
                num = num * theta_u(n, a, b) * _u_pow(0, n // b)
                factors.append((_u_pow(n - a, 1) - _u_pow(0, n // a), 1))
            total = total + RationalFunction.from_factors(num, factors)
    return total


def d_subset_form(n: int) -> RationalFunction:
    """Signed sum over subsets ``Q`` of ``[1, n]`` containing both ends of
    ``Inv_Q theta(1, n; u) * prod_{e not in Q} r_e``, with ``r_e = u^(n-e) v^(1-n/e)``."""
    if n < 1:
        raise ValueError("n must be a positive integer")
    if n == 1:
        return RationalFunction.const(UV, 1)
    P = DivisorPoset(n)
    r = {e: _u_pow(n - e, 1 - n // e) for e in P.order}
    interior = P.open_interval(1, n)
    total = LaurentPoly.zero(UV)
    for bits in itertools.product((False, True), repeat=len(interior)):
        Q = {1, n} | {e for e, b in zip(interior, bits) if b}
        term = specialize_u(inv_theta(P, Q, 1, n), P, UV)
        for e in interior:
            if e not in Q:
                term = term * r[e]
        total = total + (term if len(Q) % 2 == 0 else -term)
    # e = 1 is never outside Q, so r_1 never appears in the products
    factors = [(r[e] - 1, 1) for e in P.order[:-1]]
    return RationalFunction.from_factors(-_u_pow(0, 1 - n) * total, factors)


# -- identities ---------------------------------------------------------------


def inversion_check(n: int) -> bool:
    """``D_n(1/u, 1/v) == v^(n-1) D_n(u, v)``."""
    dn = d(n)
    inv = dn.substitute({"u": _u_pow(-1), "v": _u_pow(0, -1)})
    return inv == dn * _u_pow(0, n - 1)


def igusa_exponent(n: int) -> int:
    """The exponent ``n(n-1)/2`` used by :func:`igusa_functional_equation_check` by default."""
    return comb(n, 2)


def inversion_exponent(n: int, power: Fraction | int) -> Fraction:
    """Exponent ``e`` with ``Z(1/u, 1/v) = v^e Z(u, v)`` for ``Z(u, v) = D_n(1/u, v^power)``.

    It follows from ``D_n(1/u, 1/v) = v^(n-1) D_n(u, v)``: ``e = power * (n - 1)``.
    """
    return Fraction(power) * (n - 1)


def igusa_functional_equation_check(n: int, exponent: Fraction | int | None = None,
                                    power: Fraction | int | None = None) -> bool:
    """Test ``Z(1/u, 1/v) == v^exponent Z(u, v)`` for ``Z(u, v) = D_n(1/u, v^power)``.

    Defaults: ``power = n`` and ``exponent = n(n-1)/2``.  Half-integer powers
    and exponents are handled in ``w = v^(1/2)``.  Note that with the default
    power the identity that actually holds has exponent ``n(n-1)``
    (see :func:`inversion_exponent`), so the defaults give ``False`` for every
    ``n >= 2``; ``power = n/2`` with the default exponent gives ``True``.
    """
    power = Fraction(n if power is None else power)
    exponent = Fraction(igusa_exponent(n) if exponent is None else exponent)
    if (2 * power).denominator != 1 or (2 * exponent).denominator != 1:
        raise ValueError("power and exponent must be multiples of 1/2")
    # work in w = v^(1/2) throughout so both cases share one code path
    pw, ew = int(2 * power), int(2 * exponent)
    dn = d(n)
    z = dn.substitute({"u": _u_pow(-1), "v": _u_pow(0, pw)})
    z_inv = dn.substitute({"u": _u_pow(1), "v": _u_pow(0, -pw)})
    return z_inv == z * _u_pow(0, ew)


# -- probabilities ------------------------------------------------------------


@dataclass(frozen=True)
class ProbabilityTable:
    n: int
    p: int
    rho: Fraction
    alpha: Fraction
    beta: Fraction

    def consistent(self) -> bool:
        n, p = self.n, self.p
        return self.rho == Fraction(p - 1, p ** (n + 1) - 1) * (p ** n * self.alpha + self.beta)

    def in_unit_interval(self) -> bool:
        return all(0 <= x <= 1 for x in (self.rho, self.alpha, self.beta))


def _eval_star(n: int, t: Fraction) -> Fraction:
    try:
        return Fraction(d_star(n).evaluate({"t": t}))
    except PoleError as exc:
        raise RuntimeError(f"D*_{n} has a pole at t = {t}") from exc


def probabilities(n: int, p: int) -> ProbabilityTable:
    """``alpha = D*_n(p)``, ``beta = D*_n(1/p)`` and ``rho`` for the unramified degree-``n`` field."""
    if not is_prime(p):
        raise ValueError("p must be prime")
    alpha = _eval_star(n, Fraction(p))
    beta = _eval_star(n, Fraction(1, p))
    rho = Fraction(p - 1, p ** (n + 1) - 1) * (p ** n * alpha + beta)
    return ProbabilityTable(n, p, rho, alpha, beta)


def root_targets(n: int, p: int) -> dict[str, Fraction]:
    """Exact values of ``E[N(U)] / n`` and of the φ integrals for random degree-``n`` polynomials.

    Keys: ``OK``, ``MK``, ``OUT`` (roots outside the integers), ``ALL``,
    ``alpha``, ``beta``, ``phi_OK`` and ``phi_MK``.
    """
    tab = probabilities(n, p)
    ok = Fraction(p ** (n + 1) - p ** n, p ** (n + 1) - 1) * tab.alpha
    mk = Fraction(p - 1, p ** (n + 1) - 1) * tab.beta
    dn = d(n)
    # D_n(p, p^(-n/2)) = n D*_n(p); the MK integral likewise reduces to D*_n(1/p)
    phi_ok = n * tab.alpha
    phi_mk = Fraction(1, p ** n) * n * tab.beta
    if n % 2 == 0:
        half = p ** (n // 2)
        assert phi_ok == dn.evaluate({"u": p, "v": Fraction(1, half)})
        assert phi_mk == Fraction(1, p ** n) * dn.evaluate({"u": Fraction(1, p), "v": half})
    return {
        "OK": ok,
        "MK": mk,
        "OUT": mk,
        "ALL": ok + mk,
        "rho": tab.rho,
        "alpha": tab.alpha,
        "beta": tab.beta,
        "phi_OK": phi_ok,
        "phi_MK": phi_mk,
    }


def render(f: RationalFunction) -> str:
    return str(f.cancel())


__all__ = [
    "DFamily", "ProbabilityTable", "d", "d_star", "d_chain_form", "d_subset_form", "inversion_check",
    "igusa_functional_equation_check", "igusa_exponent", "inversion_exponent", "probabilities", "root_targets", "theta_u",
    "has_only_integer_t_powers", "render", "polynomial_ring",
]
