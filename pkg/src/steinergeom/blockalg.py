"""Finite fields and the block algebras built on them.

A block algebra carries the binary operation x*y = y + (x-y)a over a
finite field (or a finite power of one, coordinatewise).  For a
multiplier a outside {0,1} the operation is an idempotent quasigroup,
and the two-generated subalgebras of a power are the affine lines over
the subfield generated by a.  Fields are represented by little-endian
coefficient tuples modulo a fixed irreducible polynomial: the first
irreducible monic polynomial in integer-value order, so the arithmetic
is reproducible.
"""

from __future__ import annotations

import itertools

from .space import LinearSpaceError, PartialLinearSpace, label_key


def _poly_rem(num, den, p):
    num = [c % p for c in num]
    d = len(den) - 1
    while True:
        while num and num[-1] == 0:
            num.pop()
        if len(num) - 1 < d:
            return num
        shift = len(num) - 1 - d
        lead = num[-1]
        for i, c in enumerate(den):
            num[shift + i] = (num[shift + i] - lead * c) % p


def _monic_polys(p, degree):
    for low in itertools.product(range(p), repeat=degree):
        yield list(low) + [1]


def _is_irreducible(coeffs, p):
    n = len(coeffs) - 1
    if coeffs[0] == 0:
        return False
    for d in range(1, n // 2 + 1):
        for den in _monic_polys(p, d):
            if not _poly_rem(coeffs, den, p):
                return False
    return True


class FiniteField:
    """GF(p**n) with tuple elements, little-endian coefficients."""

    def __init__(self, p, n=1):
        if p not in (2, 3, 5, 7, 11, 13):
            raise ValueError(f"unsupported characteristic {p}")
        if n < 1:
            raise ValueError("degree must be positive")
        self.p = p
        self.n = n
        self.q = p ** n
        if n == 1:
            self.modulus = None
        else:
            for value in range(p ** n, 2 * p ** n):
                coeffs = self._digits(value, n + 1)
                if _is_irreducible(coeffs, p):
                    self.modulus = tuple(coeffs)
                    break
            else:
                raise RuntimeError("no irreducible modulus found")
        self.elements = [self.from_int(v) for v in range(self.q)]
        self.zero = self.elements[0]
        self.one = self.elements[1]

    def _digits(self, value, length):
        out = []
        for _ in range(length):
            out.append(value % self.p)
            value //= self.p
        return out

    def from_int(self, value):
        if not 0 <= value < self.q:
            raise ValueError(f"value {value} out of range for GF({self.q})")
        return tuple(self._digits(value, self.n))

    def to_int(self, a):
        return sum(c * self.p ** i for i, c in enumerate(a))

    def add(self, a, b):
        return tuple((x + y) % self.p for x, y in zip(a, b))

    def sub(self, a, b):
        return tuple((x - y) % self.p for x, y in zip(a, b))

    def neg(self, a):
        return tuple(-x % self.p for x in a)

    def mul(self, a, b):
        conv = [0] * (2 * self.n - 1)
        for i, x in enumerate(a):
            if x:
                for j, y in enumerate(b):
                    conv[i + j] += x * y
        if self.n == 1:
            return (conv[0] % self.p,)
        rem = _poly_rem(conv, list(self.modulus), self.p)
        rem += [0] * (self.n - len(rem))
        return tuple(rem)

    def inv(self, a):
        if a == self.zero:
            raise ZeroDivisionError("zero has no inverse")
        for b in self.elements:
            if self.mul(a, b) == self.one:
                return b
        raise AssertionError("field element without inverse")

    def order_of(self, a):
        if a == self.zero:
            raise ValueError("zero has no multiplicative order")
        power, k = a, 1
        while power != self.one:
            power = self.mul(power, a)
            k += 1
        return k

    def is_primitive(self, a):
        return a != self.zero and self.order_of(a) == self.q - 1

    def primitive_elements(self):
        return [a for a in self.elements if a != self.zero and self.is_primitive(a)]


class BlockAlgebra:
    """x*y = y + (x-y)a over field**copies, coordinatewise."""

    def __init__(self, field, a, copies=1):
        if a not in field.elements:
            raise ValueError("multiplier must be a field element")
        if copies < 1:
            raise ValueError("copies must be positive")
        self.field = field
        self.a = a
        self.copies = copies
        if copies == 1:
            self.carrier = list(field.elements)
        else:
            self.carrier = list(itertools.product(field.elements, repeat=copies))

    def _star1(self, x, y):
        f = self.field
        return f.add(y, f.mul(f.sub(x, y), self.a))

    def star(self, x, y):
        if self.copies == 1:
            return self._star1(x, y)
        return tuple(self._star1(xc, yc) for xc, yc in zip(x, y))

    def label(self, x):
        if self.copies == 1:
            return self.field.to_int(x)
        return "(" + ",".join(str(self.field.to_int(c)) for c in x) + ")"

    def is_quasigroup(self):
        full = set(self.carrier)
        for x in self.carrier:
            if {self.star(x, y) for y in self.carrier} != full:
                return False
            if {self.star(y, x) for y in self.carrier} != full:
                return False
        return True

    def is_idempotent(self):
        return all(self.star(x, x) == x for x in self.carrier)

    def is_commutative(self):
        return all(self.star(x, y) == self.star(y, x)
                   for x, y in itertools.combinations(self.carrier, 2))

    def is_associative(self):
        for x, y, z in itertools.product(self.carrier, repeat=3):
            if self.star(self.star(x, y), z) != self.star(x, self.star(y, z)):
                return False
        return True

    def two_generated(self, x, y):
        span = {x, y}
        while True:
            new = set()
            for s, t in itertools.product(span, repeat=2):
                z = self.star(s, t)
                if z not in span:
                    new.add(z)
            if not new:
                return frozenset(span)
            span |= new


def _generator_map(line, big, u, v):
    """Extend g0 -> u, g1 -> v to a homomorphism image, or report failure."""
    g0, g1 = line.carrier[0], line.carrier[1]
    phi = {g0: u, g1: v}
    while True:
        changed = False
        for s, t in itertools.product(list(phi), repeat=2):
            val = line.star(s, t)
            img = big.star(phi[s], phi[t])
            if val in phi:
                if phi[val] != img:
                    return False
            else:
                phi[val] = img
                changed = True
        if not changed:
            break
    if len(phi) != len(line.carrier):
        return False
    images = list(phi.values())
    return len(set(images)) == len(images)


def verify_2q_variety(line, big):
    """Every two-generated subalgebra of big is a generator-determined
    isomorphic copy of line."""
    q = len(line.carrier)
    if len(line.two_generated(line.carrier[0], line.carrier[1])) != q:
        return False
    seen = set()
    for u, v in itertools.permutations(big.carrier, 2):
        span = big.two_generated(u, v)
        key = frozenset(span)
        if key in seen:
            continue
        if len(span) != q:
            return False
        if not _generator_map(line, big, u, v):
            return False
        seen.add(key)
    return True


def induced_steiner(algebra, with_star=False):
    """Linear space whose lines are the two-generated subalgebras.

    with_star attaches the off-diagonal star table, making the result
    a carrier for the quasigroup class checks.
    """
    points = [algebra.label(x) for x in algebra.carrier]
    lines = set()
    for u, v in itertools.combinations(algebra.carrier, 2):
        span = algebra.two_generated(u, v)
        lines.add(frozenset(algebra.label(x) for x in span))
    star = None
    if with_star:
        star = {(algebra.label(u), algebra.label(v)):
                algebra.label(algebra.star(u, v))
                for u, v in itertools.permutations(algebra.carrier, 2)}
    return PartialLinearSpace(points,
                              [sorted(l, key=label_key) for l in lines], star)


def steiner_parameters(space):
    """(v, b, k) of a Steiner system; raises if the space is not one."""
    if not space.lines:
        raise LinearSpaceError("no lines")
    sizes = {len(l) for l in space.lines}
    if len(sizes) != 1:
        raise LinearSpaceError(f"mixed line sizes {sorted(sizes)}")
    k = sizes.pop()
    for u, v in itertools.combinations(space.points, 2):
        if space.line_through(u, v) is None:
            raise LinearSpaceError(f"uncovered pair ({u!r}, {v!r})")
    return space.n, len(space.lines), k


def two_variable_identities(algebra, depth=2):
    """Group star terms in x, y by their value tables.

    Returns a sorted list of identity classes (tuples of term strings);
    two terms land in one class exactly when they agree on every pair
    of carrier values.
    """
    pairs = list(itertools.product(algebra.carrier, repeat=2))
    terms = {"x": tuple(u for u, _ in pairs), "y": tuple(v for _, v in pairs)}
    for _ in range(depth):
        known = list(terms.items())
        for (sname, svals), (tname, tvals) in itertools.product(known, repeat=2):
            name = f"({sname}*{tname})"
            if name in terms:
                continue
            terms[name] = tuple(algebra.star(s, t)
                                for s, t in zip(svals, tvals))
    groups = {}
    for name, table in terms.items():
        groups.setdefault(table, []).append(name)
    classes = [tuple(sorted(names, key=lambda s: (len(s), s)))
               for names in groups.values()]
    return sorted(classes)
