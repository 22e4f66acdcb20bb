"""Finite posets, incidence algebras, Möbius calculus and the θ polynomial.

Everything here is explicit and finite so that identities can be checked
exhaustively.  Coefficients are either exact rationals or Laurent
polynomials (see :mod:`unramified.exact`); a small :class:`Ring` tag tells the
generic routines how to build zero, one and diagonal inverses.
"""

from __future__ import annotations

import itertools
from collections.abc import Callable, Hashable, Iterable, Iterator
from dataclasses import dataclass
from fractions import Fraction

from .exact import LaurentPoly, Monomial, mono_mul

Element = Hashable


class PosetError(ValueError):
    pass


class FinitePoset:
    """A finite partially ordered set.

    ``leq`` is either a predicate ``leq(a, b)`` or an iterable of related
    pairs; reflexive pairs are added automatically.  The relation is checked
    for antisymmetry and transitivity on construction.
    """

    def __init__(self, elements: Iterable[Element], leq):
        elems = list(dict.fromkeys(elements))
        if not elems:
            raise PosetError("a poset needs at least one element")
        if callable(leq):
            up = {a: {b for b in elems if a == b or leq(a, b)} for a in elems}
        else:
            up = {a: {a} for a in elems}
            for a, b in leq:
                if a not in up or b not in up:
                    raise PosetError(f"relation mentions unknown element in {(a, b)!r}")
                up[a].add(b)
        for a in elems:
            for b in up[a]:
                if b != a and a in up[b]:
                    raise PosetError(f"antisymmetry fails for {a!r} and {b!r}")
                if not up[b] <= up[a]:
                    raise PosetError(f"transitivity fails through {a!r} <= {b!r}")
        self.elements: tuple = tuple(elems)
        self._up = {a: frozenset(s) for a, s in up.items()}
        self._down = {a: frozenset(b for b in elems if a in up[b]) for a in elems}
        # a linear extension: fewer elements below means earlier
        self.order: tuple = tuple(sorted(elems, key=lambda a: (len(self._down[a]), elems.index(a))))
        self._rank = {a: i for i, a in enumerate(self.order)}

    def __contains__(self, x) -> bool:
        return x in self._up

    def __len__(self) -> int:
        return len(self.elements)

    def __iter__(self):
        return iter(self.order)

    def __repr__(self):
        return f"FinitePoset({list(self.order)!r})"

    def _check(self, *xs) -> None:
        for x in xs:
            if x not in self._up:
                raise PosetError(f"{x!r} is not an element of the poset")

    def leq(self, x, y) -> bool:
        self._check(x, y)
        return y in self._up[x]

    def lt(self, x, y) -> bool:
        return x != y and self.leq(x, y)

    def rank(self, x) -> int:
        """Position in the fixed linear extension."""
        return self._rank[x]

    def sort(self, xs: Iterable[Element]) -> list:
        return sorted(xs, key=self._rank.__getitem__)

    def interval(self, x, y) -> tuple:
        """``[x, y]``, listed along the linear extension; empty when ``x`` is not below ``y``."""
        self._check(x, y)
        return tuple(self.sort(self._up[x] & self._down[y]))

    def open_interval(self, x, y) -> tuple:
        return tuple(z for z in self.interval(x, y) if z != x and z != y)

    def pairs(self) -> Iterator[tuple]:
        """All related pairs ``x <= y``."""
        for x in self.order:
            for y in self.sort(self._up[x]):
                yield x, y

    def subset(self, Q: Iterable[Element]) -> frozenset:
        Q = frozenset(Q)
        self._check(*Q)
        return Q


class DivisorPoset(FinitePoset):
    """Divisors of ``n`` ordered by divisibility."""

    def __init__(self, n: int):
        if not isinstance(n, int) or n < 1:
            raise PosetError("n must be a positive integer")
        self.n = n
        divs = divisors(n)
        # divisibility is already a valid order; skip the generic checks
        self.elements = tuple(divs)
        self._up = {a: frozenset(b for b in divs if b % a == 0) for a in divs}
        self._down = {a: frozenset(b for b in divs if a % b == 0) for a in divs}
        self.order = tuple(divs)
        self._rank = {a: i for i, a in enumerate(divs)}

    def __repr__(self):
        return f"DivisorPoset({self.n})"


def divisors(n: int) -> list[int]:
    small, large = [], []
    d = 1
    while d * d <= n:
        if n % d == 0:
            small.append(d)
            if d * d != n:
                large.append(n // d)
        d += 1
    return small + large[::-1]


# -- chains -------------------------------------------------------------------

Chain = tuple


def chains(P: FinitePoset, x, y, k: int) -> list[Chain]:
    """Proper chains ``x = z_0 < z_1 < ... < z_k = y``."""
    if k < 0:
        return []
    if not P.leq(x, y):
        return []
    if k == 0:
        return [(x,)] if x == y else []
    out: list[Chain] = []

    def extend(path: list, remaining: int) -> None:
        last = path[-1]
        if remaining == 1:
            if last != y:
                out.append(tuple(path) + (y,))
            return
        for z in P.open_interval(last, y):
            path.append(z)
            extend(path, remaining - 1)
            path.pop()

    if x != y:
        extend([x], k)
    return out


def all_chains(P: FinitePoset, x, y) -> Iterator[Chain]:
    """All proper chains from ``x`` to ``y`` of any length."""
    k = 0
    while True:
        cs = chains(P, x, y, k)
        if not cs and k > 0:
            return
        yield from cs
        k += 1
        if k > len(P):
            return


def is_chain(P: FinitePoset, chain: Iterable[Element]) -> bool:
    c = list(chain)
    return bool(c) and all(P.lt(a, b) for a, b in zip(c, c[1:]))


def count_refinements(P: FinitePoset, chain: Chain, m: int) -> int:
    """Number of proper chains of length ``m + 1`` that pass through every element of ``chain``."""
    if not is_chain(P, chain):
        raise PosetError(f"{chain!r} is not a proper chain")
    points = set(chain)
    return sum(1 for c in chains(P, chain[0], chain[-1], m) if points <= set(c))


def count_refinements_formula(P: FinitePoset, chain: Chain, m: int) -> int:
    """Same count as :func:`count_refinements`, as a sum over compositions of ``m``."""
    if not is_chain(P, chain):
        raise PosetError(f"{chain!r} is not a proper chain")
    if len(chain) == 1:
        return 1 if m == 0 else 0
    # polynomial convolution of the per-step length distributions
    dist = {0: 1}
    for a, b in zip(chain, chain[1:]):
        step = {}
        j = 1
        while True:
            c = len(chains(P, a, b, j))
            if not c:
                break
            step[j] = c
            j += 1
        new: dict[int, int] = {}
        for i, ci in dist.items():
            for j, cj in step.items():
                if i + j <= m:
                    new[i + j] = new.get(i + j, 0) + ci * cj
        dist = new
    return dist.get(m, 0)


# -- coefficient rings --------------------------------------------------------


@dataclass(frozen=True)
class Ring:
    """Coefficient ring tag: ``rational`` or ``laurent`` over named variables."""

    kind: str = "rational"
    variables: tuple = ()

    def __post_init__(self):
        if self.kind not in ("rational", "laurent"):
            raise ValueError(f"unknown ring kind {self.kind!r}")

    def zero(self):
        return 0 if self.kind == "rational" else LaurentPoly.zero(self.variables)

    def one(self):
        return 1 if self.kind == "rational" else LaurentPoly.const(self.variables, 1)

    def coerce(self, c):
        if self.kind == "rational":
            if isinstance(c, LaurentPoly):
                raise TypeError("Laurent coefficient in a rational incidence element")
            c = Fraction(c)
            return c.numerator if c.denominator == 1 else c
        if isinstance(c, LaurentPoly):
            if c.variables != self.variables:
                raise ValueError("coefficient over a different variable set")
            return c
        return LaurentPoly.const(self.variables, c)

    def invert(self, c):
        if self.kind == "rational":
            if c == 0:
                raise ZeroDivisionError("diagonal value is not invertible")
            c = Fraction(1) / c
            return c.numerator if c.denominator == 1 else c
        if not c.is_monomial():
            raise ZeroDivisionError(f"diagonal value {c} is not a unit of the Laurent ring")
        return c ** -1

    def is_one(self, c) -> bool:
        return c == 1


RATIONAL = Ring()


class IncidenceElement:
    """A function on related pairs ``x <= y`` of a poset, evaluated lazily.

    ``fn(x, y)`` is called at most once per pair; unrelated pairs read as zero.
    """

    def __init__(self, poset: FinitePoset, fn: Callable, ring: Ring = RATIONAL, name: str = ""):
        self.poset = poset
        self.ring = ring
        self.name = name
        self._fn = fn
        self._cache: dict = {}
        self._restricted: dict[frozenset, dict] = {}

    @classmethod
    def from_values(cls, poset: FinitePoset, values: dict, ring: Ring = RATIONAL, name: str = "") -> IncidenceElement:
        for (x, y) in values:
            if not poset.leq(x, y):
                raise PosetError(f"value given on unrelated pair {(x, y)!r}")
        zero = ring.zero()
        return cls(poset, lambda x, y: values.get((x, y), zero), ring, name)

    def __call__(self, x, y):
        key = (x, y)
        try:
            return self._cache[key]
        except KeyError:
            pass
        if not self.poset.leq(x, y):
            return self.ring.zero()
        val = self.ring.coerce(self._fn(x, y))
        self._cache[key] = val
        return val

    def values(self) -> dict:
        return {(x, y): self(x, y) for x, y in self.poset.pairs()}

    def __eq__(self, other):
        if not isinstance(other, IncidenceElement):
            return NotImplemented
        _compatible(self, other)
        return all(self(x, y) == other(x, y) for x, y in self.poset.pairs())

    __hash__ = None

    def __mul__(self, other):
        if isinstance(other, IncidenceElement):
            return convolve(self, other)
        return NotImplemented

    def __repr__(self):
        label = self.name or "IncidenceElement"
        return f"<{label} on {self.poset!r}>"


def _compatible(a: IncidenceElement, b: IncidenceElement) -> None:
    if a.poset is not b.poset and a.poset.elements != b.poset.elements:
        raise PosetError("incidence elements live on different posets")
    if a.ring != b.ring:
        raise ValueError("incidence elements have different coefficient rings")


def delta(P: FinitePoset, ring: Ring = RATIONAL) -> IncidenceElement:
    return IncidenceElement(P, lambda x, y: ring.one() if x == y else ring.zero(), ring, "delta")


def zeta(P: FinitePoset, ring: Ring = RATIONAL) -> IncidenceElement:
    return IncidenceElement(P, lambda x, y: ring.one(), ring, "zeta")


def convolve(a: IncidenceElement, b: IncidenceElement) -> IncidenceElement:
    _compatible(a, b)
    P = a.poset

    def fn(x, y):
        total = a.ring.zero()
        for z in P.interval(x, y):
            total = total + a(x, z) * b(z, y)
        return total

    return IncidenceElement(P, fn, a.ring, f"({a.name}*{b.name})")


def _restricted_table(e: IncidenceElement, Q: frozenset) -> dict:
    table = e._restricted.get(Q)
    if table is None:
        table = {}
        e._restricted[Q] = table
    return table


def restricted_inverse(e: IncidenceElement, Q: Iterable[Element] | None, x, y):
    """Value at ``(x, y)`` of the inverse of ``e`` restricted to the subposet ``Q``.

    Uses the recursion ``Inv(x, y) = -e(x, x)^-1 * sum_{x < z <= y, z in Q} e(x, z) Inv(z, y)``.
    ``Q = None`` means the whole poset.
    """
    P = e.poset
    Q = frozenset(P.elements) if Q is None else P.subset(Q)
    if x not in Q or y not in Q:
        raise PosetError(f"endpoints {(x, y)!r} must lie in Q")
    return _rinv(e, Q, _restricted_table(e, Q), x, y)


def _rinv(e: IncidenceElement, Q: frozenset, table: dict, x, y):
    key = (x, y)
    val = table.get(key)
    if val is not None:
        return val
    P, ring = e.poset, e.ring
    if not P.leq(x, y):
        return ring.zero()
    inv_diag = ring.invert(e(x, x))
    if x == y:
        val = inv_diag
    else:
        total = ring.zero()
        for z in P.interval(x, y):
            if z != x and z in Q:
                total = total + e(x, z) * _rinv(e, Q, table, z, y)
        val = -(inv_diag * total)
    table[key] = val
    return val


def inverse(e: IncidenceElement) -> IncidenceElement:
    """Two-sided convolution inverse; every diagonal value must be invertible."""
    P = e.poset
    for x in P.elements:
        e.ring.invert(e(x, x))
    return IncidenceElement(P, lambda x, y: restricted_inverse(e, None, x, y), e.ring, f"inv({e.name})")


def inverse_via_chains(e: IncidenceElement) -> IncidenceElement:
    """Inverse of a unit-diagonal element as the alternating sum over chains."""
    P = e.poset
    for x in P.elements:
        if not e.ring.is_one(e(x, x)):
            raise ValueError("chain-sum inverse needs a unit diagonal")

    def fn(x, y):
        total = e.ring.zero()
        for c in all_chains(P, x, y):
            k = len(c) - 1
            term = e.ring.one()
            for a, b in zip(c, c[1:]):
                term = term * e(a, b)
            total = total + term if k % 2 == 0 else total - term
        return total

    return IncidenceElement(P, fn, e.ring, f"chaininv({e.name})")


def restricted_inverse_via_chains(e: IncidenceElement, Q: Iterable[Element], x, y):
    """Chain-sum version of :func:`restricted_inverse` (chains inside ``Q``)."""
    P = e.poset
    Q = P.subset(Q)
    if x not in Q or y not in Q:
        raise PosetError(f"endpoints {(x, y)!r} must lie in Q")
    total = e.ring.zero()
    for c in all_chains(P, x, y):
        if not set(c) <= Q:
            continue
        term = e.ring.one()
        for a, b in zip(c, c[1:]):
            term = term * e(a, b)
        total = total + term if (len(c) - 1) % 2 == 0 else total - term
    return total


# -- Möbius -------------------------------------------------------------------

def mobius(P: FinitePoset, Q: Iterable[Element] | None = None) -> IncidenceElement:
    """Möbius function of ``P``, or of the subposet ``Q`` when given.

    The restricted version is an element on ``P`` whose queries must have
    both endpoints in ``Q``.
    """
    cached = P.__dict__.get("_mobius")
    if cached is None:
        z = zeta(P)
        mu = inverse(z)
        mu.name = "mu"
        cached = P.__dict__.setdefault("_mobius", (z, mu))
    z, mu = cached
    if Q is None:
        return mu
    Q = P.subset(Q)
    return _QueryGuard(IncidenceElement(P, lambda x, y: restricted_inverse(z, Q, x, y), RATIONAL, "mu_Q"), Q)


class _QueryGuard(IncidenceElement):
    """Wraps an element so that queries outside a subposet raise."""

    def __init__(self, inner: IncidenceElement, Q: frozenset):
        super().__init__(inner.poset, inner._fn, inner.ring, inner.name)
        self.Q = Q

    def __call__(self, x, y):
        if x not in self.Q or y not in self.Q:
            raise PosetError(f"endpoints {(x, y)!r} must lie in Q")
        return super().__call__(x, y)

    def pairs(self):
        return [(x, y) for x, y in self.poset.pairs() if x in self.Q and y in self.Q]

    def values(self) -> dict:
        return {(x, y): self(x, y) for x, y in self.pairs()}


def mobius_via_chains(P: FinitePoset, x, y) -> int:
    """``sum_k (-1)^k #C^k(x, y)``."""
    total = 0
    for k in range(len(P.interval(x, y)) + 1):
        total += (-1) ** k * len(chains(P, x, y, k))
    return total


def is_prime(p: int) -> bool:
    """Trial division; fine for the p <= 10^6 used here."""
    if p < 2:
        return False
    d = 2
    while d * d <= p:
        if p % d == 0:
            return False
        d += 1
    return True


def classical_mobius(n: int) -> int:
    """Number-theoretic Möbius function by trial division."""
    if n < 1:
        raise ValueError("n must be positive")
    result = 1
    d = 2
    while d * d <= n:
        if n % d == 0:
            n //= d
            if n % d == 0:
                return 0
            result = -result
        d += 1
    if n > 1:
        result = -result
    return result


def inv_mu(P: FinitePoset, Q: Iterable[Element], x, y):
    """``Inv_Q mu(x, y)``: the inverse of the restriction of ``mu`` to ``Q``."""
    return restricted_inverse(mobius(P), Q, x, y)


# -- Γ_Q ----------------------------------------------------------------------


def gamma(P: FinitePoset, Q: Iterable[Element], x, y):
    """``Gamma_Q(x, y) = sum_{x <= z <= y, z in Q} mu(x, z) Inv_Q mu(z, y)``, for ``y`` in ``Q``."""
    Q = P.subset(Q)
    P._check(x)
    if y not in Q:
        raise PosetError(f"{y!r} must lie in Q")
    mu = mobius(P)
    total = 0
    for z in P.interval(x, y):
        if z in Q:
            total += mu(x, z) * restricted_inverse(mu, Q, z, y)
    return total


def gamma_closed_form(P: FinitePoset, Q: Iterable[Element], x, y):
    """Case split: ``-Inv_{Q+x} mu(x, y)`` off ``Q``; ``1`` on the diagonal; ``0`` otherwise."""
    Q = P.subset(Q)
    if y not in Q:
        raise PosetError(f"{y!r} must lie in Q")
    if x not in Q:
        if not P.leq(x, y):
            return 0
        return -restricted_inverse(mobius(P), Q | {x}, x, y)
    return 1 if x == y else 0


# -- complementing subposets --------------------------------------------------

MAX_INTERIOR = 14


@dataclass(frozen=True)
class SubposetPair:
    """Subsets ``Q`` and ``Qc`` that complement the interval ``[x, y]``."""

    Q: frozenset
    Qc: frozenset
    x: Element
    y: Element

    def validate(self, P: FinitePoset) -> None:
        for S in (self.Q, self.Qc):
            if self.x not in S or self.y not in S:
                raise PosetError("both subsets must contain the interval endpoints")
            P.subset(S)
        for z in P.open_interval(self.x, self.y):
            if (z in self.Q) == (z in self.Qc):
                raise PosetError(f"interior element {z!r} must lie in exactly one subset")

    def swapped(self) -> SubposetPair:
        return SubposetPair(self.Qc, self.Q, self.x, self.y)


def complementing_pairs(P: FinitePoset, x, y) -> Iterator[SubposetPair]:
    """Every way to split the interior of ``[x, y]`` between ``Q`` and ``Qc``."""
    if not P.lt(x, y):
        raise PosetError(f"need x < y, got {(x, y)!r}")
    interior = P.open_interval(x, y)
    if len(interior) > MAX_INTERIOR:
        raise PosetError(f"interval has {len(interior)} interior elements; cap is {MAX_INTERIOR}")
    ends = frozenset((x, y))
    for bits in itertools.product((False, True), repeat=len(interior)):
        Q = ends | {z for z, b in zip(interior, bits) if b}
        Qc = ends | {z for z, b in zip(interior, bits) if not b}
        yield SubposetPair(frozenset(Q), frozenset(Qc), x, y)


def mobius_completion_check(P: FinitePoset, x, y, pair: SubposetPair) -> bool:
    """``Inv_Q mu(x, y) == -mu_{Qc}(x, y)``."""
    if (pair.x, pair.y) != (x, y):
        raise PosetError("pair endpoints differ from (x, y)")
    pair.validate(P)
    return inv_mu(P, pair.Q, x, y) == -mobius(P, pair.Qc)(x, y)


# -- θ polynomial -------------------------------------------------------------


def theta_variables(P: FinitePoset) -> tuple[str, ...]:
    return tuple(f"t_{z}" for z in P.order)


def t_var(P: FinitePoset, z) -> Monomial:
    return ((P.rank(z), 1),)


def theta(P: FinitePoset, x, y) -> LaurentPoly:
    """``theta(x, y; t) = sum_{x <= z <= y} mu(z, y) t_z / t_x``."""
    if not P.leq(x, y):
        raise PosetError(f"theta needs x <= y, got {(x, y)!r}")
    mu = mobius(P)
    names = theta_variables(P)
    ix = P.rank(x)
    terms = {}
    for z in P.interval(x, y):
        c = mu(z, y)
        if c:
            mono = tuple(sorted(((P.rank(z), 1), (ix, -1)))) if z != x else ()
            terms[mono] = c
    return LaurentPoly._make(names, terms)


def theta_element(P: FinitePoset) -> IncidenceElement:
    elem = P.__dict__.get("_theta")
    if elem is None:
        elem = IncidenceElement(P, lambda x, y: theta(P, x, y), Ring("laurent", theta_variables(P)), "theta")
        elem = P.__dict__.setdefault("_theta", elem)
    return elem


def inv_theta(P: FinitePoset, Q: Iterable[Element], x, y) -> LaurentPoly:
    """``Inv_Q theta(x, y)`` as a Laurent polynomial in the ``t`` variables."""
    return restricted_inverse(theta_element(P), Q, x, y)


def specialize_u(poly: LaurentPoly, P: FinitePoset, variables=("u", "v"), name: str = "u") -> LaurentPoly:
    """Substitute ``t_z -> u^z`` (elements must be integers)."""
    index = variables.index(name)
    out: dict = {}
    for mono, c in poly.terms.items():
        e = sum(P.order[i] * k for i, k in mono)
        m = ((index, e),) if e else ()
        out[m] = out.get(m, 0) + c
    return LaurentPoly(variables, out)


def invert_t(poly: LaurentPoly) -> LaurentPoly:
    """``t -> t^-1`` in every variable."""
    return LaurentPoly._make(poly.variables, {tuple((i, -e) for i, e in m): c for m, c in poly.terms.items()})


# -- admissible monomials -----------------------------------------------------


@dataclass(frozen=True)
class AdmissibleForm:
    """Reduced form ``prod t_{w_i} / t_{z_i}`` with ``z_1 < w_1 < z_2 < ... < w_k``."""

    z: tuple
    w: tuple

    @property
    def k(self) -> int:
        return len(self.z)

    def monomial(self, P: FinitePoset) -> Monomial:
        m: Monomial = ()
        for a, b in zip(self.z, self.w):
            m = mono_mul(m, ((P.rank(a), -1),))
            m = mono_mul(m, ((P.rank(b), 1),))
        return m


def _as_monomial(P: FinitePoset, m) -> Monomial:
    if isinstance(m, LaurentPoly):
        if not m.is_monomial():
            raise ValueError("expected a single monomial")
        (mono, c), = m.terms.items()
        if c != 1:
            raise ValueError("expected a monomial with coefficient 1")
        return mono
    if isinstance(m, dict):
        return tuple(sorted((P.rank(z), e) for z, e in m.items() if e))
    return tuple(m)


def admissible_form(P: FinitePoset, m, Q: Iterable[Element], x, y) -> AdmissibleForm | None:
    """Admissible form of ``m`` relative to ``[x, y]_Q``, or ``None`` when ``m`` is not admissible.

    ``m`` is a monomial: a ``LaurentPoly`` with one unit term, a raw
    ``(variable_index, exponent)`` tuple, or a dict ``{element: exponent}``.
    """
    Q = P.subset(Q)
    mono = _as_monomial(P, m)
    if not P.leq(x, y):
        return None
    zs, ws = [], []
    for i, e in mono:
        if e == -1:
            zs.append(P.order[i])
        elif e == 1:
            ws.append(P.order[i])
        else:
            return None
    if len(zs) != len(ws):
        return None
    seq = P.sort(zs + ws)
    zset = set(zs)
    for j, a in enumerate(seq):
        if (a in zset) != (j % 2 == 0):
            return None
    if not is_chain(P, seq) and seq:
        return None
    for a in zs:
        if a not in Q or not P.leq(x, a):
            return None
    if seq and not P.leq(seq[-1], y):
        return None
    return AdmissibleForm(tuple(seq[0::2]), tuple(seq[1::2]))


def admissible_forms(P: FinitePoset, Q: Iterable[Element], x, y) -> list[AdmissibleForm]:
    """Every admissible form supported on ``[x, y]_Q``, including the empty one."""
    Q = P.subset(Q)
    out = [AdmissibleForm((), ())]
    if not P.leq(x, y):
        return []
    interval = P.interval(x, y)

    def extend(zs: list, ws: list, floor) -> None:
        for z in interval:
            if z in Q and (floor is None or P.lt(floor, z)):
                for w in P.open_interval(z, y) + ((y,) if z != y else ()):
                    zs.append(z)
                    ws.append(w)
                    out.append(AdmissibleForm(tuple(zs), tuple(ws)))
                    extend(zs, ws, w)
                    zs.pop()
                    ws.pop()

    extend([], [], None)
    return out


def theta_inverse_coefficient(P: FinitePoset, Q: Iterable[Element], x, y, m):
    """Closed-form coefficient of ``m`` in ``Inv_Q theta(x, y)``; zero off the admissible monomials."""
    Q = P.subset(Q)
    if x not in Q or y not in Q:
        raise PosetError(f"endpoints {(x, y)!r} must lie in Q")
    form = m if isinstance(m, AdmissibleForm) else admissible_form(P, m, Q, x, y)
    if form is None:
        return 0
    if not form.z:
        return inv_mu(P, Q, x, y)
    value = inv_mu(P, Q, x, form.z[0])
    if not value:
        return 0
    zs = form.z + (y,)
    for i, w in enumerate(form.w):
        value *= mobius(P, Q | {w})(zs[i], w) * gamma(P, Q, w, zs[i + 1])
        if not value:
            return 0
    return value


def theta_inverse_coefficients_check(P: FinitePoset, Q: Iterable[Element], x, y) -> bool:
    """Compare every coefficient of ``Inv_Q theta(x, y)`` with the closed form.

    Also checks that the support consists of admissible monomials only.
    """
    Q = P.subset(Q)
    poly = inv_theta(P, Q, x, y)
    forms = admissible_forms(P, Q, x, y)
    monos = {f.monomial(P): f for f in forms}
    if not set(poly.terms) <= set(monos):
        return False
    return all(poly.coefficient(mono) == theta_inverse_coefficient(P, Q, x, y, form)
               for mono, form in monos.items())


def theta_inversion_check(P: FinitePoset, x, y, pair: SubposetPair) -> bool:
    """``Inv_Q theta(t) == -(t_y / t_x) Inv_Qc theta(1/t)`` as Laurent polynomials.

    The per-monomial form is checked as well, with both coefficients taken
    from the closed form whenever ``m`` and ``m^-1 t_y / t_x`` are admissible
    for ``Q`` and ``Qc`` respectively.
    """
    if (pair.x, pair.y) != (x, y):
        raise PosetError("pair endpoints differ from (x, y)")
    pair.validate(P)
    lhs = inv_theta(P, pair.Q, x, y)
    ratio = mono_mul(t_var(P, y), ((P.rank(x), -1),))
    rhs = -invert_t(inv_theta(P, pair.Qc, x, y)).shift(ratio)
    if lhs != rhs:
        return False
    for form in admissible_forms(P, pair.Q, x, y):
        mono = form.monomial(P)
        partner = mono_mul(tuple((i, -e) for i, e in mono), ratio)
        other = admissible_form(P, partner, pair.Qc, x, y)
        if other is None:
            continue
        a = theta_inverse_coefficient(P, pair.Q, x, y, form)
        b = theta_inverse_coefficient(P, pair.Qc, x, y, other)
        if a != -b:
            return False
    return True


@dataclass
class VerificationResult:
    name: str
    checked: int
    failures: list

    @property
    def ok(self) -> bool:
        return not self.failures


def verify_divisor_poset(n: int) -> list[VerificationResult]:
    """Run every incidence identity exhaustively on the divisors of ``n``."""
    P = DivisorPoset(n)
    mu, z, d = mobius(P), zeta(P), delta(P)
    results = []

    def record(name, items):
        checked, failures = 0, []
        for label, ok in items:
            checked += 1
            if not ok:
                failures.append(label)
        results.append(VerificationResult(name, checked, failures))

    record("zeta*mu=delta", (((x, y), convolve(z, mu)(x, y) == d(x, y) == convolve(mu, z)(x, y))
                             for x, y in P.pairs()))
    chain_mu = inverse_via_chains(z)
    record("chain inverse", (((x, y), chain_mu(x, y) == mu(x, y)) for x, y in P.pairs()))
    record("mobius chains", (((x, y), mobius_via_chains(P, x, y) == mu(x, y)) for x, y in P.pairs()))
    record("classical mobius", (((1, e), mu(1, e) == classical_mobius(e)) for e in P.elements))

    def refinement_items():
        for x, y in P.pairs():
            for k in range(len(P.interval(x, y))):
                for c in chains(P, x, y, k):
                    for m in range(k, len(P.interval(x, y))):
                        yield (c, m), count_refinements(P, c, m) == count_refinements_formula(P, c, m)

    record("refinement count", refinement_items())

    def gamma_items():
        elems = P.order
        for r in range(1, len(elems) + 1):
            for Q in itertools.combinations(elems, r):
                for yy in Q:
                    for xx in elems:
                        yield (Q, xx, yy), gamma(P, Q, xx, yy) == gamma_closed_form(P, Q, xx, yy)

    record("gamma formula", gamma_items())

    def pair_items(check):
        for x, y in P.pairs():
            if x != y:
                for pair in complementing_pairs(P, x, y):
                    yield (sorted(pair.Q), x, y), check(P, x, y, pair)

    record("mobius completion", pair_items(mobius_completion_check))
    record("theta inversion", pair_items(theta_inversion_check))

    def coefficient_items():
        for x, y in P.pairs():
            interior = P.open_interval(x, y)
            for bits in itertools.product((False, True), repeat=len(interior)):
                Q = {x, y} | {zz for zz, b in zip(interior, bits) if b}
                yield (sorted(Q), x, y), theta_inverse_coefficients_check(P, Q, x, y)

    record("theta coefficients", coefficient_items())
    return results
