"""GF(2^m) arithmetic with log/antilog tables, plus GF(2)[x] helpers.

Field elements are integers in polynomial basis (bit i is the coefficient of
alpha^i).  Binary polynomials are integer bitmasks with the constant term in
the least significant bit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Pinned primitive polynomials, one per extension degree.
PRIMITIVE_POLYS = {
    2: 0b111,  # x^2 + x + 1
    3: 0b1011,  # x^3 + x + 1
    4: 0b10011,  # x^4 + x + 1
    5: 0b100101,  # x^5 + x^2 + 1
    6: 0b1000011,  # x^6 + x + 1
    7: 0b10001001,  # x^7 + x^3 + 1
    8: 0b100011101,  # x^8 + x^4 + x^3 + x^2 + 1
    9: 0b1000010001,  # x^9 + x^4 + 1
    10: 0b10000001001,  # x^10 + x^3 + 1
    11: 0b100000000101,  # x^11 + x^2 + 1
    12: 0b1000001010011,  # x^12 + x^6 + x^4 + x + 1
}


class NotPrimitive(ValueError):
    """The polynomial does not generate the full multiplicative group."""


@dataclass(frozen=True, eq=False)
class FieldTables:
    m: int
    primitive_poly: int
    log_table: np.ndarray  # log_table[0] is unused (-1)
    antilog_table: np.ndarray  # length 2*(2^m - 1), periodic

    @property
    def order(self) -> int:
        """Multiplicative group order 2^m - 1."""
        return (1 << self.m) - 1

    @property
    def size(self) -> int:
        return 1 << self.m

    def alpha(self, power: int) -> int:
        return int(self.antilog_table[power % self.order])

    def log(self, a: int) -> int:
        if a == 0:
            raise ZeroDivisionError("log of zero field element")
        return int(self.log_table[a])


def make_field(m: int, primitive_poly: int | None = None) -> FieldTables:
    if not 2 <= m <= 12:
        raise ValueError(f"extension degree must be in 2..12, got {m}")
    if primitive_poly is None:
        primitive_poly = PRIMITIVE_POLYS[m]
    if poly_degree(primitive_poly) != m:
        raise ValueError(f"polynomial {primitive_poly:#b} does not have degree {m}")

    q1 = (1 << m) - 1
    antilog = np.zeros(2 * q1, dtype=np.int64)
    log = np.full(q1 + 1, -1, dtype=np.int64)
    x = 1
    for i in range(q1):
        if i > 0 and x == 1:
            raise NotPrimitive(
                f"polynomial {primitive_poly:#b}: alpha has order {i}, expected {q1}"
            )
        antilog[i] = x
        log[x] = i
        x <<= 1
        if x & (1 << m):
            x ^= primitive_poly
    if x != 1:
        # reducible polynomial: alpha is not even a unit of order dividing q1
        raise NotPrimitive(f"polynomial {primitive_poly:#b} is not primitive")
    antilog[q1:] = antilog[:q1]
    log.flags.writeable = False
    antilog.flags.writeable = False
    return FieldTables(m, primitive_poly, log, antilog)


def field_mul(a: int, b: int, f: FieldTables) -> int:
    if a == 0 or b == 0:
        return 0
    return int(f.antilog_table[(f.log_table[a] + f.log_table[b]) % f.order])


def field_inv(a: int, f: FieldTables) -> int:
    if a == 0:
        raise ZeroDivisionError("zero has no multiplicative inverse")
    return int(f.antilog_table[(f.order - f.log_table[a]) % f.order])


def field_pow(a: int, e: int, f: FieldTables) -> int:
    if a == 0:
        return 0 if e > 0 else 1
    return int(f.antilog_table[(f.log_table[a] * e) % f.order])


# -- binary polynomials ------------------------------------------------------


def poly_degree(p: int) -> int:
    """Degree of a binary polynomial; -1 for the zero polynomial."""
    return p.bit_length() - 1


def poly_mul(a: int, b: int) -> int:
    out = 0
    while b:
        if b & 1:
            out ^= a
        a <<= 1
        b >>= 1
    return out


def poly_divmod(a: int, b: int) -> tuple[int, int]:
    if b == 0:
        raise ZeroDivisionError("polynomial division by zero")
    db = poly_degree(b)
    quot = 0
    while poly_degree(a) >= db:
        shift = poly_degree(a) - db
        quot |= 1 << shift
        a ^= b << shift
    return quot, a


def poly_gcd(a: int, b: int) -> int:
    while b:
        a, b = b, poly_divmod(a, b)[1]
    return a


def poly_lcm(a: int, b: int) -> int:
    return poly_divmod(poly_mul(a, b), poly_gcd(a, b))[0]


def poly_to_bits(p: int) -> list[int]:
    """Coefficient list, lowest degree first."""
    return [(p >> i) & 1 for i in range(max(poly_degree(p) + 1, 1))]


def poly_from_bits(bits) -> int:
    return sum(int(b) << i for i, b in enumerate(bits))


def poly_eval(p: int, x: int, f: FieldTables) -> int:
    """Evaluate a binary polynomial at a field element (Horner)."""
    acc = 0
    for i in range(poly_degree(p), -1, -1):
        acc = field_mul(acc, x, f) ^ ((p >> i) & 1)
    return acc


def conjugacy_class(power: int, f: FieldTables) -> list[int]:
    """Exponents {power * 2^j mod (2^m - 1)} of the conjugates of alpha^power."""
    cls = []
    e = power % f.order
    while e not in cls:
        cls.append(e)
        e = (2 * e) % f.order
    return cls


def minimal_polynomial(power: int, f: FieldTables) -> int:
    """Minimal polynomial of alpha^power over GF(2), as a bitmask."""
    # multiply out prod (x - beta) over the conjugates; coefficients land in GF(2)
    coeffs = [1]  # field-valued, lowest degree first
    for e in conjugacy_class(power, f):
        root = f.alpha(e)
        nxt = [0] * (len(coeffs) + 1)
        for i, c in enumerate(coeffs):
            nxt[i + 1] ^= c
            nxt[i] ^= field_mul(c, root, f)
        coeffs = nxt
    if any(c not in (0, 1) for c in coeffs):
        raise ArithmeticError("minimal polynomial has non-binary coefficients")
    return poly_from_bits(coeffs)
