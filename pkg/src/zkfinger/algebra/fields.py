"""Field arithmetic for the BN254 (alt_bn128) pairing stack.

Two fields matter to callers: the scalar field (order of the curve groups,
where witnesses and polynomials live) and the base field tower
Fp -> Fp2 -> Fp6 -> Fp12 used by point arithmetic and the pairing.

The tower is kept as raw tuples of gmpy2 mpz values rather than classes:
the Miller loop and final exponentiation execute tens of thousands of
multiplications per verification and attribute lookups would dominate.

Tower construction (standard alt_bn128 layout):
    Fp2  = Fp[u]  / (u^2 + 1)
    Fp6  = Fp2[v] / (v^3 - xi),  xi = 9 + u
    Fp12 = Fp6[w] / (w^2 - v)
"""

from gmpy2 import mpz, invert

# Base field modulus and curve group order. p = 36x^4+36x^3+24x^2+6x+1 and
# r = 36x^4+36x^3+18x^2+6x+1 for the BN parameter x below; both are checked
# at import so a typo in either constant cannot survive.
P = mpz(21888242871839275222246405745257275088696311157297823662689037894645226208583)
R = mpz(21888242871839275222246405745257275088548364400416034343698204186575808495617)
BN_X = mpz(4965661367192848881)

assert P == 36 * BN_X**4 + 36 * BN_X**3 + 24 * BN_X**2 + 6 * BN_X + 1
assert R == 36 * BN_X**4 + 36 * BN_X**3 + 18 * BN_X**2 + 6 * BN_X + 1
assert P % 4 == 3  # enables sqrt by exponentiation with (p+1)/4


class FieldElement:
    """An element of the scalar field (integers mod the group order).

    This is the field that witnesses, R1CS matrices, and QAP polynomials
    are defined over.
    """

    __slots__ = ("value",)

    modulus = int(R)

    def __init__(self, value):
        if isinstance(value, FieldElement):
            value = value.value
        self.value = int(value) % self.modulus

    def __add__(self, other):
        return FieldElement(self.value + _coerce(other))

    __radd__ = __add__

    def __sub__(self, other):
        return FieldElement(self.value - _coerce(other))

    def __rsub__(self, other):
        return FieldElement(_coerce(other) - self.value)

    def __mul__(self, other):
        return FieldElement(self.value * _coerce(other))

    __rmul__ = __mul__

    def __neg__(self):
        return FieldElement(-self.value)

    def __truediv__(self, other):
        return self * FieldElement(_coerce(other)).inverse()

    def __rtruediv__(self, other):
        return FieldElement(_coerce(other)) * self.inverse()

    def __pow__(self, exponent):
        return FieldElement(pow(self.value, int(exponent), self.modulus))

    def inverse(self):
        if self.value == 0:
            raise ZeroDivisionError("0 has no inverse in the scalar field")
        return FieldElement(int(invert(self.value, R)))

    def __eq__(self, other):
        if isinstance(other, FieldElement):
            return self.value == other.value
        if isinstance(other, int):
            return self.value == other % self.modulus
        return NotImplemented

    def __hash__(self):
        return hash(self.value)

    def __bool__(self):
        return self.value != 0

    def __repr__(self):
        return f"FieldElement({self.value})"

    def to_bytes(self) -> bytes:
        return self.value.to_bytes(32, "little")

    @classmethod
    def from_bytes(cls, data: bytes) -> "FieldElement":
        if len(data) != 32:
            raise ValueError("scalar field element must be 32 bytes")
        value = int.from_bytes(data, "little")
        if value >= cls.modulus:
            raise ValueError("scalar field element out of range")
        return cls(value)


def _coerce(other):
    if isinstance(other, FieldElement):
        return other.value
    if isinstance(other, int):
        return other
    raise TypeError(f"cannot mix FieldElement with {type(other).__name__}")


def inv_mod_r(a: int) -> int:
    if a % R == 0:
        raise ZeroDivisionError("0 has no inverse in the scalar field")
    return int(invert(a, R))


# ---------------------------------------------------------------------------
# Fp2 = Fp[u]/(u^2+1), elements are (a0, a1) meaning a0 + a1*u.

FQ2_ZERO = (mpz(0), mpz(0))
FQ2_ONE = (mpz(1), mpz(0))


def fq2(a0, a1=0):
    return (mpz(a0) % P, mpz(a1) % P)


def fq2_add(a, b):
    return ((a[0] + b[0]) % P, (a[1] + b[1]) % P)


def fq2_sub(a, b):
    return ((a[0] - b[0]) % P, (a[1] - b[1]) % P)


def fq2_neg(a):
    return ((-a[0]) % P, (-a[1]) % P)


def fq2_conj(a):
    return (a[0], (-a[1]) % P)


def fq2_mul(a, b):
    a0, a1 = a
    b0, b1 = b
    t0 = a0 * b0
    t1 = a1 * b1
    # Karatsuba: (a0+a1)(b0+b1) - t0 - t1 gives the cross term.
    return ((t0 - t1) % P, ((a0 + a1) * (b0 + b1) - t0 - t1) % P)


def fq2_sqr(a):
    a0, a1 = a
    return ((a0 + a1) * (a0 - a1) % P, (a0 * a1 * 2) % P)


def fq2_scale(a, k):
    # k is an Fp scalar.
    return (a[0] * k % P, a[1] * k % P)


def fq2_inv(a):
    a0, a1 = a
    norm = a0 * a0 + a1 * a1
    if norm % P == 0:
        raise ZeroDivisionError("0 has no inverse in Fp2")
    t = invert(norm, P)
    return (a0 * t % P, -a1 * t % P)


def fq2_mul_by_xi(a):
    # xi = 9 + u; (a0 + a1 u)(9 + u) = (9 a0 - a1) + (a0 + 9 a1) u.
    a0, a1 = a
    return ((a0 * 9 - a1) % P, (a0 + a1 * 9) % P)


XI = fq2(9, 1)


# ---------------------------------------------------------------------------
# Fp6 = Fp2[v]/(v^3 - xi), elements are (c0, c1, c2) of Fp2 values.

FQ6_ZERO = (FQ2_ZERO, FQ2_ZERO, FQ2_ZERO)
FQ6_ONE = (FQ2_ONE, FQ2_ZERO, FQ2_ZERO)


def fq6_add(a, b):
    return (fq2_add(a[0], b[0]), fq2_add(a[1], b[1]), fq2_add(a[2], b[2]))


def fq6_sub(a, b):
    return (fq2_sub(a[0], b[0]), fq2_sub(a[1], b[1]), fq2_sub(a[2], b[2]))


def fq6_neg(a):
    return (fq2_neg(a[0]), fq2_neg(a[1]), fq2_neg(a[2]))


def fq6_mul(a, b):
    a0, a1, a2 = a
    b0, b1, b2 = b
    t0 = fq2_mul(a0, b0)
    t1 = fq2_mul(a1, b1)
    t2 = fq2_mul(a2, b2)
    c0 = fq2_add(t0, fq2_mul_by_xi(fq2_sub(fq2_mul(fq2_add(a1, a2), fq2_add(b1, b2)), fq2_add(t1, t2))))
    c1 = fq2_add(fq2_sub(fq2_mul(fq2_add(a0, a1), fq2_add(b0, b1)), fq2_add(t0, t1)), fq2_mul_by_xi(t2))
    c2 = fq2_add(fq2_sub(fq2_mul(fq2_add(a0, a2), fq2_add(b0, b2)), fq2_add(t0, t2)), t1)
    return (c0, c1, c2)


def fq6_sqr(a):
    a0, a1, a2 = a
    s0 = fq2_sqr(a0)
    ab = fq2_mul(a0, a1)
    s1 = fq2_add(ab, ab)
    s2 = fq2_sqr(fq2_add(fq2_sub(a0, a1), a2))
    bc = fq2_mul(a1, a2)
    s3 = fq2_add(bc, bc)
    s4 = fq2_sqr(a2)
    return (
        fq2_add(s0, fq2_mul_by_xi(s3)),
        fq2_add(s1, fq2_mul_by_xi(s4)),
        fq2_sub(fq2_add(fq2_add(s1, s2), s3), fq2_add(s0, s4)),
    )


def fq6_mul_by_v(a):
    # v * (c0 + c1 v + c2 v^2) = xi*c2 + c0 v + c1 v^2.
    return (fq2_mul_by_xi(a[2]), a[0], a[1])


def fq6_scale_fq2(a, k):
    return (fq2_mul(a[0], k), fq2_mul(a[1], k), fq2_mul(a[2], k))


def fq6_mul_by_01(a, b0, b1):
    # Multiply by the sparse element b0 + b1 v (b2 = 0).
    a0, a1, a2 = a
    t0 = fq2_mul(a0, b0)
    t1 = fq2_mul(a1, b1)
    c0 = fq2_add(t0, fq2_mul_by_xi(fq2_sub(fq2_mul(fq2_add(a1, a2), b1), t1)))
    c1 = fq2_add(fq2_sub(fq2_mul(fq2_add(a0, a1), fq2_add(b0, b1)), fq2_add(t0, t1)), FQ2_ZERO)
    c2 = fq2_add(fq2_sub(fq2_mul(fq2_add(a0, a2), b0), t0), t1)
    return (c0, c1, c2)


def fq6_inv(a):
    a0, a1, a2 = a
    c0 = fq2_sub(fq2_sqr(a0), fq2_mul_by_xi(fq2_mul(a1, a2)))
    c1 = fq2_sub(fq2_mul_by_xi(fq2_sqr(a2)), fq2_mul(a0, a1))
    c2 = fq2_sub(fq2_sqr(a1), fq2_mul(a0, a2))
    t = fq2_inv(
        fq2_add(
            fq2_mul(a0, c0),
            fq2_mul_by_xi(fq2_add(fq2_mul(a2, c1), fq2_mul(a1, c2))),
        )
    )
    return (fq2_mul(c0, t), fq2_mul(c1, t), fq2_mul(c2, t))


# ---------------------------------------------------------------------------
# Fp12 = Fp6[w]/(w^2 - v), elements are (c0, c1) of Fp6 values.

FQ12_ZERO = (FQ6_ZERO, FQ6_ZERO)
FQ12_ONE = (FQ6_ONE, FQ6_ZERO)


def fq12_add(a, b):
    return (fq6_add(a[0], b[0]), fq6_add(a[1], b[1]))


def fq12_mul(a, b):
    a0, a1 = a
    b0, b1 = b
    t0 = fq6_mul(a0, b0)
    t1 = fq6_mul(a1, b1)
    c0 = fq6_add(t0, fq6_mul_by_v(t1))
    c1 = fq6_sub(fq6_sub(fq6_mul(fq6_add(a0, a1), fq6_add(b0, b1)), t0), t1)
    return (c0, c1)


def fq12_sqr(a):
    a0, a1 = a
    t = fq6_mul(a0, a1)
    c0 = fq6_sub(
        fq6_sub(fq6_mul(fq6_add(a0, a1), fq6_add(a0, fq6_mul_by_v(a1))), t),
        fq6_mul_by_v(t),
    )
    return (c0, fq6_add(t, t))


def fq12_conj(a):
    # This is the p^6 Frobenius; in the cyclotomic subgroup it inverts.
    return (a[0], fq6_neg(a[1]))


def fq12_inv(a):
    a0, a1 = a
    t = fq6_inv(fq6_sub(fq6_sqr(a0), fq6_mul_by_v(fq6_sqr(a1))))
    return (fq6_mul(a0, t), fq6_neg(fq6_mul(a1, t)))


def fq12_eq_one(a):
    return a == FQ12_ONE


def fq12_pow(a, e):
    e = int(e)
    if e < 0:
        a = fq12_inv(a)
        e = -e
    result = FQ12_ONE
    base = a
    while e:
        if e & 1:
            result = fq12_mul(result, base)
        base = fq12_sqr(base)
        e >>= 1
    return result


def fq12_cyclotomic_exp(a, e):
    """Exponentiation valid for elements of the cyclotomic subgroup.

    Uses a signed (NAF) expansion: in that subgroup the inverse is a
    conjugation, so negative digits cost one cheap conjugate.
    """
    a_inv = fq12_conj(a)
    result = FQ12_ONE
    started = False
    for digit in reversed(naf(int(e))):
        if started:
            result = fq12_sqr(result)
        if digit == 1:
            result = fq12_mul(result, a)
            started = True
        elif digit == -1:
            result = fq12_mul(result, a_inv)
            started = True
    return result


def naf(value: int) -> list:
    """Non-adjacent form, least significant digit first."""
    digits = []
    while value:
        if value & 1:
            d = 2 - (value % 4)
            value -= d
        else:
            d = 0
        digits.append(d)
        value >>= 1
    return digits


# Frobenius: with gamma = xi^((p-1)/6), the coefficient of w^j picks up
# gamma^j after conjugating its Fp2 parts. The flattened basis order is
# (w^0, w^2, w^4, w^1, w^3, w^5) = (c0[0], c0[1], c0[2], c1[0], c1[1], c1[2]).
def _fq2_pow(a, e):
    result = FQ2_ONE
    base = a
    while e:
        if e & 1:
            result = fq2_mul(result, base)
        base = fq2_sqr(base)
        e >>= 1
    return result


GAMMA = [_fq2_pow(XI, j * (int(P) - 1) // 6) for j in range(6)]


def fq12_frobenius(a):
    (c00, c01, c02), (c10, c11, c12) = a
    return (
        (
            fq2_conj(c00),
            fq2_mul(fq2_conj(c01), GAMMA[2]),
            fq2_mul(fq2_conj(c02), GAMMA[4]),
        ),
        (
            fq2_mul(fq2_conj(c10), GAMMA[1]),
            fq2_mul(fq2_conj(c11), GAMMA[3]),
            fq2_mul(fq2_conj(c12), GAMMA[5]),
        ),
    )


def fq12_frobenius_n(a, n):
    for _ in range(n):
        a = fq12_frobenius(a)
    return a
