"""Arithmetic in the unramified degree-n extension of Z_p, truncated at p^M.

Elements of ``O_K / p^M`` (a Galois ring) are tuples of ``n`` integers in
``[0, p^M)``: coordinates in the basis ``1, g, ..., g^(n-1)`` where ``g`` is
a root of a fixed monic modulus that is irreducible mod ``p``.  Frobenius is
the matrix of the automorphism sending ``g`` to the Hensel lift of ``g^p``.

The root counter isolates roots of ``f in Z_p[X]`` by residue refinement and
decides whether each isolated root generates ``K`` from the Frobenius
stabilizer of its residue disc, so it never needs the roots to full precision.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import numpy as np

from .incidence import classical_mobius, divisors, is_prime

Vec = tuple  # coordinates of an O_K element


def vp(a: int, p: int, cap: int) -> int:
    """p-adic valuation of an integer, capped at ``cap`` (zero gives ``cap``)."""
    if a == 0:
        return cap
    k = 0
    while a % p == 0 and k < cap:
        a //= p
        k += 1
    return k


# -- polynomials over F_p (coefficient lists, lowest degree first) ------------


def _fp_trim(a: list[int]) -> list[int]:
    while a and a[-1] == 0:
        a.pop()
    return a


def _fp_mod(a: list[int], b: list[int], p: int) -> list[int]:
    a = _fp_trim([x % p for x in a])
    b = _fp_trim([x % p for x in b])
    inv = pow(b[-1], -1, p)
    while len(a) >= len(b):
        c = a[-1] * inv % p
        shift = len(a) - len(b)
        for i, bi in enumerate(b):
            a[shift + i] = (a[shift + i] - c * bi) % p
        _fp_trim(a)
    return a


def _fp_irreducible(m: list[int], p: int) -> bool:
    """Monic ``m`` irreducible over F_p, by trial division by monic polynomials of degree <= deg/2."""
    n = len(m) - 1
    for d in range(1, n // 2 + 1):
        for code in range(p ** d):
            g = [(code // p ** i) % p for i in range(d)] + [1]
            if not _fp_mod(m, g, p):
                return False
    return True


def lowest_irreducible(p: int, n: int) -> tuple[int, ...]:
    """Monic degree-``n`` irreducible mod ``p`` with the smallest code ``sum c_i p^i``."""
    if n == 1:
        return (0, 1)
    for code in range(p ** n):
        m = [(code // p ** i) % p for i in range(n)] + [1]
        if m[0] == 0:
            continue
        if _fp_irreducible(m, p):
            return tuple(m)
    raise RuntimeError(f"no irreducible polynomial of degree {n} mod {p}")


# -- residue field ------------------------------------------------------------


class ResidueField:
    """F_{p^n} with elements coded as ``sum c_i p^i`` (coordinates in the power basis of ``g``)."""

    def __init__(self, p: int, n: int, modulus: Sequence[int]):
        self.p, self.n = p, n
        self.q = q = p ** n
        self.modulus = tuple(c % p for c in modulus)
        self.powers = np.array([p ** i for i in range(n)], dtype=np.int64)
        codes = np.arange(q, dtype=np.int64)
        self.digits = (codes[:, None] // self.powers[None, :]) % p
        self._build_tables()
        self.frob = np.array([self.pow_code(int(a), p) for a in range(q)], dtype=np.int64)

    def encode(self, digits) -> int:
        return int(sum((int(c) % self.p) * self.p ** i for i, c in enumerate(digits)))

    def decode(self, code: int) -> tuple[int, ...]:
        return tuple(int(x) for x in self.digits[code])

    def _mul_digits(self, a: Sequence[int], b: Sequence[int]) -> list[int]:
        p, n, m = self.p, self.n, self.modulus
        prod = [0] * (2 * n - 1)
        for i, ai in enumerate(a):
            if ai:
                for j, bj in enumerate(b):
                    prod[i + j] += ai * bj
        for k in range(2 * n - 2, n - 1, -1):
            c = prod[k] % p
            if c:
                for i in range(n):
                    prod[k - n + i] -= c * m[i]
            prod[k] = 0
        return [x % p for x in prod[:n]]

    def mul_code(self, a: int, b: int) -> int:
        return self.encode(self._mul_digits(self.decode(a), self.decode(b)))

    def pow_code(self, a: int, e: int) -> int:
        if a == 0:
            return 0 if e else 1
        return int(self.exp[(int(self.log[a]) * e) % (self.q - 1)])

    def _build_tables(self) -> None:
        q = self.q
        self.exp = np.zeros(q - 1, dtype=np.int64)
        self.log = np.full(q, -1, dtype=np.int64)
        for g in range(1, q):
            x, seen = 1, []
            for _ in range(q - 1):
                seen.append(x)
                x = self.mul_code(x, g)
                if x == 1:
                    break
            if len(seen) == q - 1:
                self.generator = g
                self.exp[:] = seen
                self.log[np.array(seen)] = np.arange(q - 1)
                return
        raise RuntimeError("residue field has no primitive element")

    def add(self, a, b):
        return ((self.digits[a] + self.digits[b]) % self.p) @ self.powers

    def neg(self, a):
        return ((-self.digits[a]) % self.p) @ self.powers

    def mul(self, a, b):
        a = np.asarray(a)
        b = np.asarray(b)
        out = self.exp[(self.log[a] + self.log[b]) % (self.q - 1)]
        return np.where((a == 0) | (b == 0), 0, out)

    def inverse(self, a: int) -> int:
        if a == 0:
            raise ZeroDivisionError("zero has no inverse in the residue field")
        return int(self.exp[(-int(self.log[a])) % (self.q - 1)])

    def eval_all(self, coeffs: Sequence[int]) -> np.ndarray:
        """Values of the polynomial with coefficient codes ``coeffs`` at every field element."""
        xs = np.arange(self.q, dtype=np.int64)
        acc = np.full(self.q, int(coeffs[-1]), dtype=np.int64)
        for c in reversed(coeffs[:-1]):
            acc = self.add(self.mul(acc, xs), np.full(self.q, int(c), dtype=np.int64))
        return acc

    def roots(self, coeffs: Sequence[int]) -> list[int]:
        if all(c == 0 for c in coeffs):
            raise ValueError("the zero polynomial has every element as a root")
        return [int(i) for i in np.flatnonzero(self.eval_all(coeffs) == 0)]

    def degree(self, a: int) -> int:
        """Degree of ``a`` over F_p (size of its Frobenius orbit)."""
        x, d = int(self.frob[a]), 1
        while x != a:
            x, d = int(self.frob[x]), d + 1
        return d


# -- Galois ring context ------------------------------------------------------


class GaloisRingContext:
    """``O_K / p^M`` for the unramified degree-``n`` extension ``K`` of ``Q_p``."""

    def __init__(self, p: int, n: int, M: int):
        if not is_prime(p):
            raise ValueError("p must be prime")
        if n < 1:
            raise ValueError("n must be at least 1")
        if M < 4:
            raise ValueError("precision M must be at least 4")
        self.p, self.n, self.M = p, n, M
        self.pM = p ** M
        self.modulus = lowest_irreducible(p, n)
        self.residue_field = ResidueField(p, n, self.modulus[:n] + (1,))
        # X^(n+j) as a combination of 1, ..., X^(n-1)
        red = []
        cur = [(-c) % self.pM for c in self.modulus[:n]]
        for _ in range(max(n - 1, 0)):
            red.append(tuple(cur))
            nxt = [0] + cur[:-1]
            top = cur[-1]
            cur = [(nxt[i] - top * self.modulus[i]) % self.pM for i in range(n)]
        self._reduce_rows = red
        self._frob = self._frobenius_matrices()

    def __repr__(self):
        return f"GaloisRingContext(p={self.p}, n={self.n}, M={self.M})"

    def __reduce__(self):
        return gr_context, (self.p, self.n, self.M)

    # -- raw coordinate arithmetic (tuples of ints) --

    def zero(self) -> Vec:
        return (0,) * self.n

    def one(self) -> Vec:
        return (1,) + (0,) * (self.n - 1)

    def scalar(self, a: int, N: int | None = None) -> Vec:
        return (a % (N or self.pM),) + (0,) * (self.n - 1)

    def add(self, x: Vec, y: Vec, N: int | None = None) -> Vec:
        N = N or self.pM
        return tuple((a + b) % N for a, b in zip(x, y))

    def sub(self, x: Vec, y: Vec, N: int | None = None) -> Vec:
        N = N or self.pM
        return tuple((a - b) % N for a, b in zip(x, y))

    def smul(self, c: int, x: Vec, N: int | None = None) -> Vec:
        N = N or self.pM
        return tuple(c * a % N for a in x)

    def mul(self, x: Vec, y: Vec, N: int | None = None) -> Vec:
        N = N or self.pM
        n = self.n
        if n == 1:
            return (x[0] * y[0] % N,)
        prod = [0] * (2 * n - 1)
        for i, a in enumerate(x):
            if a:
                for j, b in enumerate(y):
                    prod[i + j] += a * b
        out = prod[:n]
        for j, row in enumerate(self._reduce_rows):
            c = prod[n + j]
            if c:
                for i in range(n):
                    out[i] += c * row[i]
        return tuple(a % N for a in out)

    def power(self, x: Vec, e: int, N: int | None = None) -> Vec:
        result, base = self.one(), x
        while e:
            if e & 1:
                result = self.mul(result, base, N)
            e >>= 1
            if e:
                base = self.mul(base, base, N)
        return result

    def valuation(self, x: Vec, cap: int | None = None) -> int:
        cap = self.M if cap is None else cap
        return min(vp(a, self.p, cap) for a in x)

    def residue(self, x: Vec) -> int:
        p = self.p
        return sum((a % p) * p ** i for i, a in enumerate(x))

    def lift_residue(self, code: int) -> Vec:
        return self.residue_field.decode(code)

    def inverse(self, x: Vec, N: int | None = None) -> Vec:
        """Inverse of a unit, by Newton iteration from the residue-field inverse."""
        N = N or self.pM
        r = self.residue(x)
        if r == 0:
            raise ZeroDivisionError("element is not a unit")
        y = self.lift_residue(self.residue_field.inverse(r))
        two = self.scalar(2, N)
        prec = 1
        while self.p ** prec < N:
            y = self.mul(y, self.sub(two, self.mul(x, y, N), N), N)
            prec *= 2
        return tuple(a % N for a in y)

    def frob(self, x: Vec, d: int = 1, N: int | None = None) -> Vec:
        """``sigma^d(x)``."""
        N = N or self.pM
        d %= self.n
        if d == 0:
            return tuple(a % N for a in x)
        mat = self._frob[d]
        return tuple(sum(row[j] * x[j] for j in range(self.n)) % N for row in mat)

    def _frobenius_matrices(self) -> list:
        n, N = self.n, self.pM
        if n == 1:
            return [((1,),)]
        g = (0, 1) + (0,) * (n - 2)
        y = self.power(g, self.p)
        m = self.modulus

        def m_at(z):
            acc = self.scalar(m[n])
            for c in reversed(m[:n]):
                acc = self.add(self.mul(acc, z), self.scalar(c))
            return acc

        def dm_at(z):
            acc = self.scalar(n * m[n])
            for i in range(n - 1, 0, -1):
                acc = self.add(self.mul(acc, z), self.scalar(i * m[i]))
            return acc

        for _ in range(self.M.bit_length() + 2):
            y_next = self.sub(y, self.mul(m_at(y), self.inverse(dm_at(y))))
            if y_next == y:
                break
            y = y_next
        if any(m_at(y)):
            raise RuntimeError("Hensel lift of the Frobenius image did not converge")
        cols = [self.one()]
        for _ in range(n - 1):
            cols.append(self.mul(cols[-1], y))
        base = tuple(tuple(cols[j][i] for j in range(n)) for i in range(n))
        mats = [tuple(tuple(int(i == j) for j in range(n)) for i in range(n)), base]
        for _ in range(2, n + 1):
            prev = mats[-1]
            mats.append(tuple(tuple(sum(prev[i][k] * base[k][j] for k in range(n)) % N for j in range(n))
                              for i in range(n)))
        if mats[n] != mats[0]:
            raise RuntimeError("Frobenius does not have order dividing n")
        return mats[:n]

    # -- element helpers --

    def element(self, coeffs) -> GaloisRingElement:
        if isinstance(coeffs, int):
            coeffs = (coeffs,) + (0,) * (self.n - 1)
        coeffs = tuple(int(c) % self.pM for c in coeffs)
        if len(coeffs) != self.n:
            raise ValueError(f"expected {self.n} coordinates")
        return GaloisRingElement(self, coeffs)

    def generator(self) -> GaloisRingElement:
        if self.n == 1:
            return self.element((0,))
        return self.element((0, 1) + (0,) * (self.n - 2))

    def random_element(self, rng: np.random.Generator) -> GaloisRingElement:
        digits = rng.integers(0, self.p, size=(self.n, self.M))
        weights = [self.p ** i for i in range(self.M)]
        return self.element(tuple(sum(int(d) * w for d, w in zip(row, weights)) for row in digits))

    def stabilizer_index(self, x: Vec, level: int) -> int:
        """Smallest ``d | n`` with ``sigma^d(x) == x`` modulo ``p^level``."""
        N = self.p ** level
        xr = tuple(a % N for a in x)
        for d in divisors(self.n):
            if self.frob(xr, d, N) == xr:
                return d
        raise AssertionError("sigma^n must be the identity")


@lru_cache(maxsize=None)
def gr_context(p: int, n: int, M: int = 40) -> GaloisRingContext:
    """Shared, immutable context for ``O_K / p^M``; the modulus choice is deterministic."""
    return GaloisRingContext(p, n, M)


@dataclass(frozen=True, eq=False)
class GaloisRingElement:
    ctx: GaloisRingContext
    coeffs: Vec

    def _other(self, other) -> Vec:
        if isinstance(other, GaloisRingElement):
            if other.ctx is not self.ctx:
                raise ValueError("elements from different Galois ring contexts")
            return other.coeffs
        if isinstance(other, int):
            return self.ctx.scalar(other)
        return NotImplemented

    def __add__(self, other):
        o = self._other(other)
        return NotImplemented if o is NotImplemented else GaloisRingElement(self.ctx, self.ctx.add(self.coeffs, o))

    __radd__ = __add__

    def __sub__(self, other):
        o = self._other(other)
        return NotImplemented if o is NotImplemented else GaloisRingElement(self.ctx, self.ctx.sub(self.coeffs, o))

    def __rsub__(self, other):
        o = self._other(other)
        return NotImplemented if o is NotImplemented else GaloisRingElement(self.ctx, self.ctx.sub(o, self.coeffs))

    def __neg__(self):
        return GaloisRingElement(self.ctx, self.ctx.sub(self.ctx.zero(), self.coeffs))

    def __mul__(self, other):
        o = self._other(other)
        return NotImplemented if o is NotImplemented else GaloisRingElement(self.ctx, self.ctx.mul(self.coeffs, o))

    __rmul__ = __mul__

    def __pow__(self, e: int):
        if e < 0:
            return self.inverse() ** (-e)
        return GaloisRingElement(self.ctx, self.ctx.power(self.coeffs, e))

    def __eq__(self, other):
        if isinstance(other, GaloisRingElement):
            return self.ctx is other.ctx and self.coeffs == other.coeffs
        if isinstance(other, int):
            return self.coeffs == self.ctx.scalar(other)
        return NotImplemented

    def __hash__(self):
        return hash((self.ctx.p, self.ctx.n, self.ctx.M, self.coeffs))

    def __repr__(self):
        return f"GaloisRingElement({list(self.coeffs)})"

    def inverse(self) -> GaloisRingElement:
        return GaloisRingElement(self.ctx, self.ctx.inverse(self.coeffs))

    def valuation(self) -> int:
        """``v_p``; ``M`` for the zero element."""
        return self.ctx.valuation(self.coeffs)

    def residue(self) -> int:
        return self.ctx.residue(self.coeffs)

    def frobenius(self, d: int = 1) -> GaloisRingElement:
        return GaloisRingElement(self.ctx, self.ctx.frob(self.coeffs, d))

    def is_prime_subring(self) -> bool:
        return all(c == 0 for c in self.coeffs[1:])


def frobenius(x: GaloisRingElement, d: int = 1) -> GaloisRingElement:
    return x.frobenius(d)


def orbit_size(x: GaloisRingElement, precision: int | None = None) -> int:
    """Smallest ``d | n`` with ``sigma^d(x) == x`` modulo ``p^precision`` (default ``M``)."""
    return x.ctx.stabilizer_index(x.coeffs, x.ctx.M if precision is None else precision)


def element_degree(x: GaloisRingElement) -> int | None:
    """Degree of ``x`` over ``Q_p``, or ``None`` when precision ``M`` cannot decide it.

    The answer is the Frobenius orbit size.  An orbit that closes early only
    modulo ``p^M`` is not a proof unless ``x`` lies in ``Z_p``, so such
    elements report ``None``.
    """
    d = orbit_size(x)
    if d == x.ctx.n or x.is_prime_subring():
        return d
    return None


def conjugate_valuations(x: GaloisRingElement) -> list[int | None]:
    """``v(x - sigma^d x)`` for ``d = 1 .. n-1``; ``None`` where the difference vanishes mod ``p^M``."""
    ctx = x.ctx
    out = []
    for d in range(1, ctx.n):
        diff = ctx.sub(x.coeffs, ctx.frob(x.coeffs, d))
        v = ctx.valuation(diff)
        out.append(None if v >= ctx.M else v)
    return out


def disc_of_element(x: GaloisRingElement) -> int | None:
    """``v_p(disc(1, x, ..., x^(n-1)))``, or ``None`` when it is at least ``M`` (overflow).

    ``disc(x) = prod_{i<j} (sigma^i x - sigma^j x)^2`` and the pair ``(i, j)`` has the
    same valuation as ``x - sigma^(j-i) x``, so ``v(disc) = 2 sum_d (n - d) v(x - sigma^d x)``.
    """
    vals = conjugate_valuations(x)
    if any(v is None for v in vals):
        return None
    n = x.ctx.n
    return 2 * sum((n - d) * v for d, v in enumerate(vals, start=1))


def phi_half_valuation(x: GaloisRingElement) -> int | None:
    """``-log_p phi(x)`` in half units, i.e. ``v(disc(x))``; ``None`` on overflow."""
    return disc_of_element(x)


def phi(x: GaloisRingElement) -> Fraction:
    """``phi(x) = |disc(x)|^(1/2) = p^(-v(disc x)/2)``; zero on overflow.

    The discriminant valuation is always even here, so the result is an exact
    rational.  On overflow the true value is at most ``p^(-M/2)``.
    """
    v = disc_of_element(x)
    if v is None:
        return Fraction(0)
    return Fraction(1, x.ctx.p ** (v // 2))


def relative_disc_valuation(x: GaloisRingElement, m: int) -> int | None:
    """``v(disc_{K/L}(x))`` where ``L`` is the degree-``m`` subfield, i.e. Galois group ``<sigma^m>``."""
    ctx = x.ctx
    if ctx.n % m:
        raise ValueError("m must divide n")
    r = ctx.n // m
    total = 0
    for j in range(1, r):
        diff = ctx.sub(x.coeffs, ctx.frob(x.coeffs, j * m))
        v = ctx.valuation(diff)
        if v >= ctx.M:
            return None
        total += 2 * (r - j) * v
    return total


def phi_relative(x: GaloisRingElement, m: int) -> Fraction:
    """``phi_{K/L}(x)`` with ``|p|_L = p^(-m)``; zero on overflow."""
    v = relative_disc_valuation(x, m)
    if v is None:
        return Fraction(0)
    return Fraction(1, x.ctx.p ** (m * v // 2))


def teichmuller(ctx: GaloisRingContext, residue_code: int) -> GaloisRingElement:
    """The Teichmüller lift of a residue-field element (fixed by ``sigma^d`` iff its residue is)."""
    z = ctx.lift_residue(residue_code)
    q = ctx.p ** ctx.n
    for _ in range(ctx.M):
        nz = ctx.power(z, q)
        if nz == z:
            break
        z = nz
    return GaloisRingElement(ctx, z)


def inertial_count(q: int, d: int) -> int:
    """Number of elements of ``F_{q^d}`` of exact degree ``d`` over ``F_q``:
    ``q * sum_{e | d} mu(d/e) q^(e-1) = sum_{e | d} mu(d/e) q^e``."""
    if q < 2 or d < 1:
        raise ValueError("need q >= 2 and d >= 1")
    return sum(classical_mobius(d // e) * q ** e for e in divisors(d))


# -- polynomials over Z_p -----------------------------------------------------


@dataclass(frozen=True)
class PadicPolynomial:
    """``xi_0 + xi_1 X + ... + xi_n X^n`` with coefficients modulo ``p^M``; not necessarily monic."""

    coeffs: tuple
    p: int
    M: int

    def __post_init__(self):
        pM = self.p ** self.M
        out = []
        for c in self.coeffs:
            if isinstance(c, GaloisRingElement):
                if c.ctx.p != self.p or c.ctx.M != self.M:
                    raise ValueError("coefficient lives in a different Galois ring")
                out.append(int(c.coeffs[0]) if c.is_prime_subring() else c)
            else:
                out.append(int(c) % pM)
        object.__setattr__(self, "coeffs", tuple(out))
        if not self.coeffs:
            raise ValueError("a polynomial needs at least one coefficient")

    @property
    def has_rational_coeffs(self) -> bool:
        """True when every coefficient lies in ``Z_p`` (so the root set is Frobenius-stable)."""
        return all(isinstance(c, int) for c in self.coeffs)

    def coeff_vectors(self, ctx: GaloisRingContext) -> list:
        return [c.coeffs if isinstance(c, GaloisRingElement) else ctx.scalar(c) for c in self.coeffs]

    @property
    def n(self) -> int:
        return len(self.coeffs) - 1

    def reciprocal(self) -> PadicPolynomial:
        """``X^n f(1/X)``: the coefficient list reversed."""
        return PadicPolynomial(self.coeffs[::-1], self.p, self.M)

    def content(self) -> int:
        return min(c.valuation() if isinstance(c, GaloisRingElement) else vp(c, self.p, self.M)
                   for c in self.coeffs)

    def is_zero(self) -> bool:
        return all(c == 0 for c in self.coeffs)

    def __call__(self, x: GaloisRingElement) -> GaloisRingElement:
        ctx = x.ctx
        vecs = self.coeff_vectors(ctx)
        acc = vecs[-1]
        for c in reversed(vecs[:-1]):
            acc = ctx.add(ctx.mul(acc, x.coeffs), c)
        return GaloisRingElement(ctx, acc)

    def residue_code(self) -> int:
        """``sum (xi_i mod p) p^i`` for coefficients in ``Z_p``."""
        if not self.has_rational_coeffs:
            raise ValueError("residue codes are defined for Z_p coefficients only")
        p = self.p
        return sum((c % p) * p ** i for i, c in enumerate(self.coeffs))


def reciprocal(f: PadicPolynomial) -> PadicPolynomial:
    return f.reciprocal()


@dataclass(frozen=True)
class RootCountResult:
    count_ok: int
    count_mk: int
    count_outside: int
    inconclusive: int
    roots: tuple = field(default=(), compare=False)

    @property
    def total(self) -> int:
        return self.count_ok + self.count_outside


class DegenerateSample(ValueError):
    """The polynomial vanishes modulo ``p^M`` (or so nearly that nothing can be decided)."""


def _budget(ctx: GaloisRingContext) -> int:
    return ctx.M // 2


def _taylor_shift(ctx: GaloisRingContext, coeffs: list, r: Vec, N: int) -> list:
    """Coefficients of ``G(r + s)`` from those of ``G(s)``."""
    a = list(coeffs)
    d = len(a) - 1
    if not any(r):
        return a
    for i in range(d):
        for j in range(d - 1, i - 1, -1):
            a[j] = ctx.add(a[j], ctx.mul(r, a[j + 1], N), N)
    return a


def _strip(ctx: GaloisRingContext, coeffs: list, prec: int, weights: Sequence[int] | None = None):
    """Divide by the largest power of ``p`` dividing every ``p^w_i * coeffs[i]``.

    Returns ``(new_coeffs, new_prec)``, or ``None`` when the content reaches ``prec``.
    """
    p = ctx.p
    weights = weights or [0] * len(coeffs)
    content = prec
    for c, w in zip(coeffs, weights):
        content = min(content, ctx.valuation(c, prec) + w)
    if content >= prec:
        return None
    new_prec = prec - content
    N = p ** new_prec
    out = []
    for c, w in zip(coeffs, weights):
        shift = content - w
        if shift >= 0:
            out.append(tuple((a // p ** shift) % N for a in c))
        else:
            out.append(tuple((a * p ** (-shift)) % N for a in c))
    return out, new_prec


def _search(ctx: GaloisRingContext, coeffs: list, prec: int, zero_only: bool, budget: int,
            lift: bool = False, original: PadicPolynomial | None = None, stable: bool = True):
    """Count generating roots of ``G`` in ``O_K`` (or only in ``p O_K``).

    ``stable`` says the coefficients lie in ``Z_p``, so Frobenius permutes the
    roots.  Then a disc holding a simple root ``x`` has ``sigma^d(x) = x`` exactly
    when ``sigma^d`` maps the disc to itself, and the degree of ``x`` is read off
    the disc.  Otherwise every simple root is Newton-refined and its degree is
    taken as the Frobenius orbit size at the precision reached.

    Returns ``(count_ok, count_mk, inconclusive, roots)``.
    """
    n, p, field_ = ctx.n, ctx.p, ctx.residue_field
    stripped = _strip(ctx, coeffs, prec)
    if stripped is None:
        raise DegenerateSample("polynomial vanishes to the working precision")
    G, prec = stripped
    ok = mk = inconclusive = 0
    roots = []
    # node: (coefficients, precision, center, level, in_maximal_ideal, total_content)
    stack = [(G, prec, ctx.zero(), 0, None)]
    while stack:
        G, prec, center, level, in_mk = stack.pop()
        N = p ** prec
        res = [ctx.residue(c) for c in G]
        top = max((i for i, r in enumerate(res) if r), default=0)
        if top == 0:
            continue
        if level == 0 and zero_only:
            candidates = [0] if res[0] == 0 else []
        else:
            candidates = field_.roots(res[: top + 1])
        for r in candidates:
            R = ctx.lift_residue(r)
            H = _taylor_shift(ctx, G, R, N)
            mult = next(i for i, c in enumerate(H) if ctx.residue(c))
            new_center = ctx.add(center, ctx.smul(p ** level, R))
            branch_mk = (r == 0) if level == 0 else in_mk
            if stable:
                e = ctx.stabilizer_index(new_center, level + 1)
                # a generating root forces exactly n/e roots into a disc with stabilizer index e
                if mult != n // e:
                    continue
                if mult == 1:
                    ok += 1
                    mk += int(branch_mk)
                    if lift:
                        roots.append(_newton_root(ctx, H, prec, new_center, level, original))
                    continue
            elif mult == 1:
                x = _newton_root(ctx, H, prec, new_center, level, original)
                if ctx.stabilizer_index(x.coeffs, min(ctx.M, level + 1 + prec)) == n:
                    ok += 1
                    mk += int(branch_mk)
                    roots.append(x)
                continue
            if level + 1 > budget:
                inconclusive += 1
                continue
            child = _strip(ctx, H, prec, weights=list(range(len(H))))
            if child is None:
                inconclusive += 1
                continue
            stack.append((child[0], child[1], new_center, level + 1, branch_mk))
    return ok, mk, inconclusive, roots


def _newton_root(ctx, H, prec, center, level, original) -> GaloisRingElement:
    """Refine the simple root of ``H`` in ``p O_K`` and map it back to ``x = center + p^level * s``."""
    N = ctx.p ** prec
    deriv = [ctx.smul(i, c, N) for i, c in enumerate(H)][1:]

    def ev(coeffs, s):
        acc = coeffs[-1]
        for c in reversed(coeffs[:-1]):
            acc = ctx.add(ctx.mul(acc, s, N), c, N)
        return acc

    s = ctx.zero()
    for _ in range(prec.bit_length() + 2):
        step = ctx.mul(ev(H, s), ctx.inverse(ev(deriv, s), N), N)
        if not any(step):
            break
        s = ctx.sub(s, step, N)
    x = GaloisRingElement(ctx, ctx.add(center, ctx.smul(ctx.p ** level, s)))
    if original is not None:
        v = original(x).valuation()
        if 4 * v < 3 * ctx.M:
            raise RuntimeError(f"Hensel-refined root only satisfies v(f(x)) = {v}")
    return x


def count_generating_roots(f: PadicPolynomial, ctx: GaloisRingContext, lift: bool = False,
                           budget: int | None = None) -> RootCountResult:
    """Roots of ``f`` that generate ``K``: in ``O_K``, in ``p O_K`` and outside ``O_K``.

    Roots outside ``O_K`` are the inverses of the generating roots of the
    reciprocal polynomial lying in ``p O_K``.  With ``lift=True`` the roots in
    ``O_K`` are refined by Newton iteration and checked against ``f``.
    """
    if f.p != ctx.p or f.M != ctx.M:
        raise ValueError("polynomial and context disagree on p or M")
    if f.n > ctx.n:
        raise ValueError(f"polynomial degree bound {f.n} exceeds n = {ctx.n}")
    if f.is_zero():
        raise DegenerateSample("f is identically zero modulo p^M")
    budget = _budget(ctx) if budget is None else budget
    stable = f.has_rational_coeffs
    coeffs = f.coeff_vectors(ctx)
    check = f if (lift or not stable) else None
    ok, mk, inc, roots = _search(ctx, coeffs, ctx.M, False, budget, lift, check, stable)
    rev = coeffs[::-1]
    _, out, inc2, _ = _search(ctx, rev, ctx.M, True, budget, stable=stable)
    return RootCountResult(ok, mk, out, inc + inc2, tuple(roots))


# -- level-0 lookup table for batch counting ----------------------------------


@dataclass(frozen=True)
class ResidueTable:
    """Counts determined by ``f mod p`` alone, indexed by the residue code ``sum c_i p^i``.

    ``resolved[k]`` is false when the residue polynomial is zero or has a
    residue root that needs refinement; those samples take the full path.
    """

    ok: np.ndarray
    mk: np.ndarray
    resolved: np.ndarray


@lru_cache(maxsize=None)
def residue_table(p: int, n: int, M: int = 40) -> ResidueTable:
    ctx = gr_context(p, n, M)
    size = p ** (n + 1)
    ok = np.zeros(size, dtype=np.int64)
    mk = np.zeros(size, dtype=np.int64)
    resolved = np.zeros(size, dtype=bool)
    for code in range(1, size):
        digits = [(code // p ** i) % p for i in range(n + 1)]
        coeffs = [ctx.scalar(c) for c in digits]
        a, b, inc, _ = _search(ctx, coeffs, 1, False, 0)
        if inc == 0:
            ok[code], mk[code], resolved[code] = a, b, True
    return ResidueTable(ok, mk, resolved)
