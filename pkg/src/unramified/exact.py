"""Exact multivariate Laurent polynomials and rational functions over Q.

Monomials are stored sparsely as sorted tuples of ``(variable_index, exponent)``
pairs with nonzero exponents, so a polynomial over many variables (one per poset
element, say) only pays for the variables it actually uses.

Rational functions are not kept in lowest terms.  The denominator is a product
of *normalized factors* (primitive polynomials with leading coefficient one);
monomials and constants are units in a Laurent ring and always live in the
numerator.  Sums take the syntactic least common multiple of the factor lists,
and equality is decided by cross multiplication.
"""

from __future__ import annotations

import heapq
from collections.abc import Iterable, Mapping
from fractions import Fraction
from numbers import Rational
from typing import Union

Monomial = tuple[tuple[int, int], ...]
Scalar = Union[int, Fraction]

ONE_MONO: Monomial = ()


class PoleError(ZeroDivisionError):
    """Raised when evaluating or substituting hits a vanishing denominator."""


def _coef(c) -> Scalar:
    if isinstance(c, bool):
        return int(c)
    if isinstance(c, int):
        return c
    if isinstance(c, Fraction):
        return c.numerator if c.denominator == 1 else c
    if isinstance(c, Rational):
        return _coef(Fraction(c.numerator, c.denominator))
    raise TypeError(f"coefficient must be an exact rational, got {type(c).__name__}")


def mono_mul(a: Monomial, b: Monomial) -> Monomial:
    if not a:
        return b
    if not b:
        return a
    d = dict(a)
    for i, e in b:
        s = d.get(i, 0) + e
        if s:
            d[i] = s
        else:
            del d[i]
    return tuple(sorted(d.items()))


def mono_pow(a: Monomial, k: int) -> Monomial:
    if k == 0:
        return ONE_MONO
    return tuple((i, e * k) for i, e in a)


def mono_inv(a: Monomial) -> Monomial:
    return tuple((i, -e) for i, e in a)


class LaurentPoly:
    """A Laurent polynomial with exact rational coefficients.

    ``variables`` is the declared (ordered) variable set; arithmetic between
    polynomials over different variable sets raises ``ValueError``.  Scalars
    (``int`` / ``Fraction``) mix freely as constants.
    """

    __slots__ = ("variables", "_terms", "_hash")

    def __init__(self, variables: Iterable[str], terms: Mapping | Iterable = ()):
        self.variables = tuple(variables)
        if len(set(self.variables)) != len(self.variables):
            raise ValueError(f"duplicate variable names in {self.variables}")
        items = terms.items() if isinstance(terms, Mapping) else terms
        acc: dict[Monomial, Scalar] = {}
        nvars = len(self.variables)
        for mono, c in items:
            mono = self._parse_monomial(mono, nvars)
            acc[mono] = acc.get(mono, 0) + _coef(c)
        self._terms = {m: _coef(c) for m, c in acc.items() if c != 0}
        self._hash = None

    def _parse_monomial(self, mono, nvars: int) -> Monomial:
        if isinstance(mono, Mapping):
            index = {v: i for i, v in enumerate(self.variables)}
            try:
                pairs = [(index[name], int(e)) for name, e in mono.items() if e]
            except KeyError as exc:
                raise ValueError(f"unknown variable {exc.args[0]!r}") from None
            return tuple(sorted(pairs))
        pairs = tuple(sorted((int(i), int(e)) for i, e in mono if e))
        for i, _ in pairs:
            if not 0 <= i < nvars:
                raise ValueError(f"variable index {i} out of range")
        if len({i for i, _ in pairs}) != len(pairs):
            raise ValueError("repeated variable index in monomial")
        return pairs

    @classmethod
    def _make(cls, variables: tuple[str, ...], terms: dict[Monomial, Scalar]) -> LaurentPoly:
        obj = cls.__new__(cls)
        obj.variables = variables
        obj._terms = terms
        obj._hash = None
        return obj

    # -- constructors ---------------------------------------------------------

    @classmethod
    def zero(cls, variables: Iterable[str]) -> LaurentPoly:
        return cls._make(tuple(variables), {})

    @classmethod
    def const(cls, variables: Iterable[str], c) -> LaurentPoly:
        c = _coef(c)
        return cls._make(tuple(variables), {ONE_MONO: c} if c else {})

    @classmethod
    def var(cls, variables: Iterable[str], name: str) -> LaurentPoly:
        return cls.monomial(variables, {name: 1})

    @classmethod
    def monomial(cls, variables: Iterable[str], exponents: Mapping[str, int], coeff=1) -> LaurentPoly:
        return cls(variables, [(dict(exponents), coeff)])

    @classmethod
    def from_dense(cls, variables: Iterable[str], terms: Mapping[tuple[int, ...], object]) -> LaurentPoly:
        """Build from ``{(e_0, e_1, ...): coeff}`` with one exponent per variable."""
        variables = tuple(variables)
        return cls(variables, [(tuple(enumerate(exps)), c) for exps, c in terms.items()])

    # -- inspection -----------------------------------------------------------

    @property
    def terms(self) -> dict[Monomial, Scalar]:
        return self._terms

    def __len__(self) -> int:
        return len(self._terms)

    def __bool__(self) -> bool:
        return bool(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def is_monomial(self) -> bool:
        return len(self._terms) == 1

    def is_constant(self) -> bool:
        return not self._terms or (len(self._terms) == 1 and ONE_MONO in self._terms)

    def constant_value(self) -> Scalar:
        if not self.is_constant():
            raise ValueError("polynomial is not constant")
        return self._terms.get(ONE_MONO, 0)

    def exponents(self, mono: Monomial) -> dict[str, int]:
        return {self.variables[i]: e for i, e in mono}

    def dense(self, mono: Monomial) -> tuple[int, ...]:
        out = [0] * len(self.variables)
        for i, e in mono:
            out[i] = e
        return tuple(out)

    def coefficient(self, mono) -> Scalar:
        if isinstance(mono, Mapping):
            mono = self._parse_monomial(mono, len(self.variables))
        return self._terms.get(mono, 0)

    def used_variables(self) -> set[str]:
        return {self.variables[i] for m in self._terms for i, _ in m}

    def degree(self, name: str) -> int:
        i = self.variables.index(name)
        return max((dict(m).get(i, 0) for m in self._terms), default=0)

    def min_degree(self, name: str) -> int:
        i = self.variables.index(name)
        return min((dict(m).get(i, 0) for m in self._terms), default=0)

    def order_key(self, mono: Monomial) -> tuple:
        """Graded lexicographic key; earlier variables dominate."""
        d = self.dense(mono)
        return (sum(d), d)

    def sorted_terms(self) -> list[tuple[Monomial, Scalar]]:
        return sorted(self._terms.items(), key=lambda kv: self.order_key(kv[0]), reverse=True)

    def leading_term(self) -> tuple[Monomial, Scalar]:
        if not self._terms:
            raise ValueError("zero polynomial has no leading term")
        mono = max(self._terms, key=self.order_key)
        return mono, self._terms[mono]

    def min_monomial(self) -> Monomial:
        """Componentwise minimum exponent over all terms (the monomial content)."""
        if not self._terms:
            return ONE_MONO
        used = {i for m in self._terms for i, _ in m}
        dicts = [dict(m) for m in self._terms]
        lows = {i: min(d.get(i, 0) for d in dicts) for i in used}
        return tuple(sorted((i, e) for i, e in lows.items() if e))

    # -- arithmetic -----------------------------------------------------------

    def _coerce(self, other) -> LaurentPoly | None:
        if isinstance(other, LaurentPoly):
            if other.variables != self.variables:
                raise ValueError(f"variable sets differ: {self.variables} vs {other.variables}")
            return other
        if isinstance(other, (int, Fraction)):
            return LaurentPoly.const(self.variables, other)
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        if len(o._terms) > len(self._terms):
            big, small = o._terms, self._terms
        else:
            big, small = self._terms, o._terms
        out = dict(big)
        for m, c in small.items():
            s = out.get(m, 0) + c
            if s:
                out[m] = _coef(s)
            else:
                out.pop(m, None)
        return LaurentPoly._make(self.variables, out)

    __radd__ = __add__

    def __neg__(self):
        return LaurentPoly._make(self.variables, {m: -c for m, c in self._terms.items()})

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o + (-self)

    def __mul__(self, other):
        if isinstance(other, RationalFunction):
            return NotImplemented
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        a, b = self._terms, o._terms
        if not a or not b:
            return LaurentPoly._make(self.variables, {})
        if len(b) == 1:
            (mb, cb), = b.items()
            return LaurentPoly._make(self.variables, {mono_mul(m, mb): _coef(c * cb) for m, c in a.items()})
        if len(a) == 1:
            return o * self
        out: dict[Monomial, Scalar] = {}
        for ma, ca in a.items():
            for mb, cb in b.items():
                m = mono_mul(ma, mb)
                out[m] = out.get(m, 0) + ca * cb
        return LaurentPoly._make(self.variables, {m: _coef(c) for m, c in out.items() if c})

    __rmul__ = __mul__

    def scale(self, c) -> LaurentPoly:
        c = _coef(c)
        if not c:
            return LaurentPoly.zero(self.variables)
        return LaurentPoly._make(self.variables, {m: _coef(v * c) for m, v in self._terms.items()})

    def shift(self, mono: Monomial) -> LaurentPoly:
        """Multiply by a monomial."""
        if not mono:
            return self
        return LaurentPoly._make(self.variables, {mono_mul(m, mono): c for m, c in self._terms.items()})

    def __pow__(self, k: int):
        if not isinstance(k, int):
            return NotImplemented
        if k < 0:
            if not self.is_monomial():
                raise ValueError("negative power of a non-monomial Laurent polynomial")
            (m, c), = self._terms.items()
            return LaurentPoly._make(self.variables, {mono_pow(m, k): _coef(Fraction(c) ** k)})
        if self.is_monomial():
            (m, c), = self._terms.items()
            return LaurentPoly._make(self.variables, {mono_pow(m, k): _coef(c ** k)})
        result = LaurentPoly.const(self.variables, 1)
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            if other == 0:
                raise ZeroDivisionError("division of a polynomial by zero")
            return self.scale(Fraction(1) / other)
        if isinstance(other, LaurentPoly):
            if other.variables != self.variables:
                raise ValueError(f"variable sets differ: {self.variables} vs {other.variables}")
            if other.is_monomial():
                return self * other ** -1
            return RationalFunction(self, other)
        if isinstance(other, RationalFunction):
            return RationalFunction(self) / other
        return NotImplemented

    def __rtruediv__(self, other):
        if isinstance(other, (int, Fraction)):
            return RationalFunction(LaurentPoly.const(self.variables, other)) / RationalFunction(self)
        return NotImplemented

    def __eq__(self, other):
        if isinstance(other, LaurentPoly):
            return self.variables == other.variables and self._terms == other._terms
        if isinstance(other, (int, Fraction)):
            return self.is_constant() and self._terms.get(ONE_MONO, 0) == other
        if isinstance(other, RationalFunction):
            return other == self
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.variables, frozenset(self._terms.items())))
        return self._hash

    # -- transformations ------------------------------------------------------

    def with_variables(self, variables: Iterable[str]) -> LaurentPoly:
        """Re-express over a different variable set containing the used variables."""
        variables = tuple(variables)
        index = {v: i for i, v in enumerate(variables)}
        remap = {}
        for i in {i for m in self._terms for i, _ in m}:
            name = self.variables[i]
            if name not in index:
                raise ValueError(f"variable {name!r} missing from {variables}")
            remap[i] = index[name]
        terms = {tuple(sorted((remap[i], e) for i, e in m)): c for m, c in self._terms.items()}
        return LaurentPoly._make(variables, terms)

    def substitute(self, assignment: Mapping[str, object], variables: Iterable[str] | None = None) -> LaurentPoly:
        """Substitute Laurent polynomials (or scalars) for variables.

        Monomial images take a fast exponent-mapping path.  A negative power
        of a non-monomial image is not a Laurent polynomial; use
        ``RationalFunction.substitute`` for that.
        """
        target = _target_variables(self, assignment, variables)
        images = _images(self, assignment, target)
        if all(img.is_monomial() for img in images.values()):
            return _monomial_substitute(self, images, target)
        out = LaurentPoly.zero(target)
        powers: dict[tuple[int, int], LaurentPoly] = {}
        for mono, c in self._terms.items():
            term = LaurentPoly.const(target, c)
            for i, e in mono:
                key = (i, e)
                if key not in powers:
                    powers[key] = images[i] ** e
                term = term * powers[key]
            out = out + term
        return out

    def evaluate(self, point: Mapping[str, object]) -> Scalar:
        total: Scalar = 0
        values = {}
        for i, name in enumerate(self.variables):
            if name in point:
                values[i] = _coef(point[name])
        for mono, c in self._terms.items():
            term = Fraction(c)
            for i, e in mono:
                if i not in values:
                    raise ValueError(f"no value given for variable {self.variables[i]!r}")
                x = values[i]
                if x == 0 and e < 0:
                    raise PoleError(f"{self.variables[i]} = 0 raised to a negative power")
                term *= Fraction(x) ** e
            total += term
        return _coef(total)

    def primitive_part(self) -> tuple[Scalar, Monomial, LaurentPoly]:
        """Split ``self = c * m * q`` with ``q`` free of monomial content and monic.

        The leading term is taken in graded-lex order.
        """
        if not self._terms:
            raise ValueError("zero polynomial has no primitive part")
        low = self.min_monomial()
        shifted = self.shift(mono_inv(low))
        _, lc = shifted.leading_term()
        inv = Fraction(1) / lc
        prim = LaurentPoly._make(self.variables, {m: _coef(c * inv) for m, c in shifted._terms.items()})
        return _coef(lc), low, prim

    def divexact(self, divisor: LaurentPoly) -> LaurentPoly | None:
        """Exact quotient ``self / divisor`` in the Laurent ring, or ``None``."""
        if divisor.variables != self.variables:
            raise ValueError("variable sets differ")
        if not divisor._terms:
            raise ZeroDivisionError("division by the zero polynomial")
        if not self._terms:
            return self
        if divisor.is_monomial():
            return self * divisor ** -1
        # Work with honest polynomials: monomials are units.
        dlow = divisor.min_monomial()
        d = divisor.shift(mono_inv(dlow))
        alow = self.min_monomial()
        rem = dict(self.shift(mono_inv(alow))._terms)
        dmono, dlc = d.leading_term()
        ddense = d.dense(dmono)
        dterms = list(d._terms.items())
        heap = [tuple(-x for x in _key(self, m)) + (m,) for m in rem]
        heapq.heapify(heap)
        quot: dict[Monomial, Scalar] = {}
        while heap:
            entry = heapq.heappop(heap)
            m = entry[-1]
            c = rem.get(m)
            if c is None:
                continue
            mdense = self.dense(m)
            if any(a < b for a, b in zip(mdense, ddense)):
                return None
            qm = mono_mul(m, mono_inv(dmono))
            qc = _coef(Fraction(c) / dlc)
            quot[qm] = qc
            for tm, tc in dterms:
                prod = mono_mul(qm, tm)
                s = rem.get(prod, 0) - qc * tc
                if s:
                    if prod not in rem:
                        heapq.heappush(heap, tuple(-x for x in _key(self, prod)) + (prod,))
                    rem[prod] = _coef(s)
                else:
                    rem.pop(prod, None)
        q = LaurentPoly._make(self.variables, quot)
        return q.shift(mono_mul(alow, mono_inv(dlow)))

    # -- rendering ------------------------------------------------------------

    def __repr__(self):
        return f"LaurentPoly({self.variables}, {self})"

    def __str__(self):
        return format_poly(self)


def _key(p: LaurentPoly, mono: Monomial) -> tuple:
    d = p.dense(mono)
    return (sum(d),) + d


def _target_variables(f, assignment, variables) -> tuple[str, ...]:
    if variables is not None:
        return tuple(variables)
    found = None
    for img in assignment.values():
        if isinstance(img, (LaurentPoly, RationalFunction)):
            if found is None:
                found = img.variables
            elif img.variables != found:
                raise ValueError("substituted values live over different variable sets")
    if found is None:
        return ()
    return found


def _images(f: LaurentPoly, assignment, target) -> dict[int, LaurentPoly]:
    images = {}
    used = {i for m in f.terms for i, _ in m}
    for i in used:
        name = f.variables[i]
        if name not in assignment:
            raise ValueError(f"no value assigned to variable {name!r}")
        img = assignment[name]
        if isinstance(img, RationalFunction):
            raise TypeError("rational-function images need RationalFunction.substitute")
        if isinstance(img, LaurentPoly):
            if img.variables != target:
                raise ValueError("image variable set does not match the target")
            images[i] = img
        else:
            images[i] = LaurentPoly.const(target, img)
    return images


def _monomial_substitute(f: LaurentPoly, images: dict[int, LaurentPoly], target) -> LaurentPoly:
    parts = {i: next(iter(img.terms.items())) for i, img in images.items()}
    out: dict[Monomial, Scalar] = {}
    for mono, c in f.terms.items():
        m = ONE_MONO
        coeff = Fraction(c)
        for i, e in mono:
            im, ic = parts[i]
            m = mono_mul(m, mono_pow(im, e))
            if ic != 1:
                coeff *= Fraction(ic) ** e
        out[m] = out.get(m, 0) + coeff
    return LaurentPoly._make(tuple(target), {m: _coef(c) for m, c in out.items() if c})


def _format_coef_term(c: Scalar, mono_str: str, first: bool) -> str:
    neg = c < 0
    a = -c if neg else c
    if mono_str == "1":
        body = str(a)
    elif a == 1:
        body = mono_str
    else:
        body = f"{a}*{mono_str}"
    if first:
        return f"-{body}" if neg else body
    return f" - {body}" if neg else f" + {body}"


def format_monomial(variables: tuple[str, ...], mono: Monomial) -> str:
    parts = []
    for i, e in mono:
        name = variables[i]
        parts.append(name if e == 1 else f"{name}^{e}")
    return "*".join(parts) if parts else "1"


def format_poly(p: LaurentPoly) -> str:
    if not p.terms:
        return "0"
    out = []
    for k, (mono, c) in enumerate(p.sorted_terms()):
        out.append(_format_coef_term(c, format_monomial(p.variables, mono), k == 0))
    return "".join(out)


# ---------------------------------------------------------------------------
# Rational functions
# ---------------------------------------------------------------------------

Factors = tuple[tuple[LaurentPoly, int], ...]


def _factor_key(f: LaurentPoly):
    return sorted((f.dense(m), str(c)) for m, c in f.terms.items())


class RationalFunction:
    """Quotient ``num / prod(factor ** mult)`` over a fixed variable set.

    Each stored denominator factor is a normalized polynomial (no monomial
    content, leading coefficient one, not a monomial); the unit parts are
    pushed into the numerator.  Nothing beyond that is cancelled, so two
    equal functions can have different representations.
    """

    __slots__ = ("num", "factors")

    def __init__(self, num, den=None):
        if isinstance(num, RationalFunction):
            if den is not None:
                raise TypeError("pass a RationalFunction alone or use division")
            self.num, self.factors = num.num, num.factors
            return
        if not isinstance(num, LaurentPoly):
            raise TypeError("numerator must be a LaurentPoly")
        if den is None:
            self.num, self.factors = num, ()
            return
        if isinstance(den, (int, Fraction)):
            den = LaurentPoly.const(num.variables, den)
        if den.variables != num.variables:
            raise ValueError("numerator and denominator variable sets differ")
        if den.is_zero():
            raise ZeroDivisionError("zero denominator")
        self.num, self.factors = _absorb(num, {}, [(den, 1)])

    @classmethod
    def from_factors(cls, num: LaurentPoly, factors: Iterable[tuple[LaurentPoly, int]]) -> RationalFunction:
        obj = cls.__new__(cls)
        obj.num, obj.factors = _absorb(num, {}, list(factors))
        return obj

    @classmethod
    def _raw(cls, num: LaurentPoly, factors: dict[LaurentPoly, int]) -> RationalFunction:
        obj = cls.__new__(cls)
        obj.num = num
        obj.factors = _freeze(factors)
        return obj

    @classmethod
    def const(cls, variables: Iterable[str], c) -> RationalFunction:
        return cls(LaurentPoly.const(variables, c))

    @property
    def variables(self) -> tuple[str, ...]:
        return self.num.variables

    @property
    def den(self) -> LaurentPoly:
        d = LaurentPoly.const(self.variables, 1)
        for f, m in self.factors:
            d = d * f ** m
        return d

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def is_polynomial(self) -> bool:
        return not self.factors

    # -- arithmetic -----------------------------------------------------------

    def _coerce(self, other) -> RationalFunction | None:
        if isinstance(other, RationalFunction):
            if other.variables != self.variables:
                raise ValueError(f"variable sets differ: {self.variables} vs {other.variables}")
            return other
        if isinstance(other, LaurentPoly):
            if other.variables != self.variables:
                raise ValueError(f"variable sets differ: {self.variables} vs {other.variables}")
            return RationalFunction(other)
        if isinstance(other, (int, Fraction)):
            return RationalFunction.const(self.variables, other)
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        if o.num.is_zero():
            return self
        if self.num.is_zero():
            return o
        fa, fb = dict(self.factors), dict(o.factors)
        lcm = dict(fa)
        for f, m in fb.items():
            if m > lcm.get(f, 0):
                lcm[f] = m
        na = _times_factors(self.num, {f: m - fa.get(f, 0) for f, m in lcm.items()})
        nb = _times_factors(o.num, {f: m - fb.get(f, 0) for f, m in lcm.items()})
        num = na + nb
        if num.is_zero():
            return RationalFunction(num)
        return RationalFunction._raw(num, lcm)

    __radd__ = __add__

    def __neg__(self):
        return RationalFunction._raw(-self.num, dict(self.factors))

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o + (-self)

    def __mul__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        num = self.num * o.num
        if num.is_zero():
            return RationalFunction(num)
        fac = dict(self.factors)
        for f, m in o.factors:
            fac[f] = fac.get(f, 0) + m
        return RationalFunction._raw(num, fac)

    __rmul__ = __mul__

    def inverse(self) -> RationalFunction:
        if self.num.is_zero():
            raise ZeroDivisionError("division by the zero rational function")
        return RationalFunction.from_factors(_times_factors(LaurentPoly.const(self.variables, 1), dict(self.factors)),
                                             [(self.num, 1)])

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self * o.inverse()

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o * self.inverse()

    def __pow__(self, k: int):
        if not isinstance(k, int):
            return NotImplemented
        if k < 0:
            return self.inverse() ** (-k)
        return RationalFunction._raw(self.num ** k, {f: m * k for f, m in self.factors} if k else {})

    def __eq__(self, other):
        if isinstance(other, (RationalFunction, LaurentPoly, int, Fraction)):
            try:
                o = self._coerce(other)
            except ValueError:
                return False
            fa, fb = dict(self.factors), dict(o.factors)
            only_a = {f: m - fb.get(f, 0) for f, m in fa.items() if m > fb.get(f, 0)}
            only_b = {f: m - fa.get(f, 0) for f, m in fb.items() if m > fa.get(f, 0)}
            return _times_factors(self.num, only_b) == _times_factors(o.num, only_a)
        return NotImplemented

    __hash__ = None  # equality is not representation-based

    # -- evaluation and substitution -----------------------------------------

    def evaluate(self, point: Mapping[str, object]) -> Scalar:
        den = Fraction(1)
        for f, m in self.factors:
            val = f.evaluate(point)
            if val == 0:
                raise PoleError(f"denominator factor {f} vanishes at {dict(point)}")
            den *= Fraction(val) ** m
        return _coef(Fraction(self.num.evaluate(point)) / den)

    def substitute(self, assignment: Mapping[str, object], variables: Iterable[str] | None = None) -> RationalFunction:
        """Compose with ``assignment``; images may be scalars, polynomials or rational functions."""
        target = _target_variables(self, assignment, variables)
        if all(isinstance(v, (LaurentPoly, int, Fraction)) for v in assignment.values()):
            imgs = {k: v for k, v in assignment.items()}
            if all(not isinstance(v, LaurentPoly) or v.is_monomial() for v in imgs.values()):
                num = self.num.substitute(imgs, target)
                factors = [(f.substitute(imgs, target), m) for f, m in self.factors]
                for f, _ in factors:
                    if f.is_zero():
                        raise PoleError("substitution makes a denominator factor vanish")
                return RationalFunction.from_factors(num, factors)
        result = _rf_substitute_poly(self.num, assignment, target)
        for f, m in self.factors:
            img = _rf_substitute_poly(f, assignment, target)
            if img.is_zero():
                raise PoleError("substitution makes a denominator factor vanish")
            result = result / img ** m
        return result

    def cancel(self) -> RationalFunction:
        """Drop denominator factors that divide the numerator exactly."""
        num = self.num
        fac = dict(self.factors)
        for f in list(fac):
            while fac[f]:
                q = num.divexact(f)
                if q is None:
                    break
                num = q
                fac[f] -= 1
        return RationalFunction._raw(num, {f: m for f, m in fac.items() if m})

    # -- rendering ------------------------------------------------------------

    def as_fraction(self) -> tuple[LaurentPoly, LaurentPoly]:
        """Integral numerator and denominator with nonnegative exponents.

        The pair is scaled so that all coefficients are coprime integers and
        the denominator's leading coefficient is positive.
        """
        num, den = self.num, self.den
        # monomials are units: strip the joint monomial content
        both = LaurentPoly._make(self.variables, {**{m: 1 for m in num.terms}, **{m: 1 for m in den.terms}})
        shift = mono_inv(both.min_monomial())
        num, den = num.shift(shift), den.shift(shift)
        coefs = list(num.terms.values()) + list(den.terms.values())
        lcm = 1
        for c in coefs:
            d = Fraction(c).denominator
            lcm = lcm * d // _gcd(lcm, d)
        ints = [int(Fraction(c) * lcm) for c in coefs]
        g = 0
        for c in ints:
            g = _gcd(g, abs(c))
        scale = Fraction(lcm, g or 1)
        _, dlc = den.leading_term()
        if dlc < 0:
            scale = -scale
        return num.scale(scale), den.scale(scale)

    def __str__(self):
        num, den = self.as_fraction()
        ns = format_poly(num)
        if den == 1:
            return ns
        ds = format_poly(den)
        if len(num) > 1:
            ns = f"({ns})"
        dmono, dlc = den.leading_term()
        if len(den) > 1 or (dmono and (dlc != 1 or len(dmono) > 1)):
            ds = f"({ds})"
        return f"{ns}/{ds}"

    def __repr__(self):
        return f"RationalFunction({self.variables}, {self})"


def _gcd(a: int, b: int) -> int:
    while b:
        a, b = b, a % b
    return abs(a)


def _freeze(fac: dict[LaurentPoly, int]) -> Factors:
    items = [(f, m) for f, m in fac.items() if m]
    items.sort(key=lambda fm: _factor_key(fm[0]))
    return tuple(items)


def _times_factors(num: LaurentPoly, fac: Mapping[LaurentPoly, int]) -> LaurentPoly:
    for f, m in fac.items():
        for _ in range(m):
            num = num * f
    return num


def _absorb(num: LaurentPoly, fac: dict[LaurentPoly, int], extra: list[tuple[LaurentPoly, int]]):
    """Normalize ``extra`` denominator factors into ``fac``, moving units into ``num``."""
    fac = dict(fac)
    for f, m in extra:
        if f.variables != num.variables:
            raise ValueError("denominator factor over a different variable set")
        if f.is_zero():
            raise ZeroDivisionError("zero denominator factor")
        if m == 0:
            continue
        c, mono, prim = f.primitive_part()
        unit = LaurentPoly._make(num.variables, {mono: c}) ** (-m)
        num = num * unit
        if prim.is_constant():
            continue
        fac[prim] = fac.get(prim, 0) + m
        if fac[prim] < 0:
            raise ValueError("negative multiplicity for a denominator factor")
    return num, _freeze(fac)


def _rf_substitute_poly(p: LaurentPoly, assignment, target) -> RationalFunction:
    images: dict[int, RationalFunction] = {}
    for i in {i for m in p.terms for i, _ in m}:
        name = p.variables[i]
        if name not in assignment:
            raise ValueError(f"no value assigned to variable {name!r}")
        img = assignment[name]
        if isinstance(img, RationalFunction):
            images[i] = img
        elif isinstance(img, LaurentPoly):
            images[i] = RationalFunction(img)
        else:
            images[i] = RationalFunction.const(target, img)
    out = RationalFunction.const(target, 0)
    cache: dict[tuple[int, int], RationalFunction] = {}
    for mono, c in p.terms.items():
        term = RationalFunction.const(target, c)
        for i, e in mono:
            if (i, e) not in cache:
                if e < 0 and images[i].is_zero():
                    raise PoleError(f"{p.variables[i]} maps to zero under a negative power")
                cache[(i, e)] = images[i] ** e
            term = term * cache[(i, e)]
        out = out + term
    return out


def as_rational_function(x, variables: Iterable[str]) -> RationalFunction:
    if isinstance(x, RationalFunction):
        return x
    if isinstance(x, LaurentPoly):
        return RationalFunction(x)
    return RationalFunction.const(variables, x)


def polynomial_ring(*names: str) -> tuple[LaurentPoly, ...]:
    """Generators of the Laurent ring in ``names``: ``u, v = polynomial_ring("u", "v")``."""
    return tuple(LaurentPoly.var(names, n) for n in names)
