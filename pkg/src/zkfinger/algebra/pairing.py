"""Optimal ate pairing on BN254.

The Miller loop runs over 6x+2 in non-adjacent form with the G2 point in
Jacobian coordinates; line functions are kept as coefficient triples
(l_y, l_x, l_0) meaning  l_y * yP  +  l_x * xP * w  +  l_0 * w^3  in the
Fp12 basis. Scaling a line by any Fp2 factor is harmless because the
final exponentiation kills subfield contributions, which is what lets
the loop avoid inversions.

Line coefficients depend only on the G2 argument, so for pairings whose
G2 side is fixed (the verification-key points) they are computed once
via precompute_g2 and replayed against many G1 arguments.
"""

from gmpy2 import mpz

from .fields import (
    P,
    R,
    BN_X,
    naf,
    fq2_add,
    fq2_sub,
    fq2_neg,
    fq2_conj,
    fq2_mul,
    fq2_sqr,
    fq2_scale,
    fq2_inv,
    FQ2_ONE,
    FQ6_ZERO,
    fq6_add,
    fq6_sub,
    fq6_mul_by_v,
    fq6_scale_fq2,
    fq6_mul_by_01,
    FQ12_ONE,
    fq12_mul,
    fq12_sqr,
    fq12_conj,
    fq12_inv,
    fq12_pow,
    fq12_cyclotomic_exp,
    fq12_frobenius,
    fq12_frobenius_n,
    GAMMA,
)
from .curve import (
    g1_is_on_curve,
    g2_is_on_curve,
    g2_in_subgroup,
    GroupError,
)

ATE_LOOP = 6 * BN_X + 2
ATE_NAF = naf(int(ATE_LOOP))

# Untwist-Frobenius-twist endomorphism constants: psi(x, y) =
# (conj(x) * GAMMA[2], conj(y) * GAMMA[3]); psi^2 scales by the norms.
_PSI2_X = fq2_mul(fq2_conj(GAMMA[2]), GAMMA[2])
_PSI2_Y = fq2_mul(fq2_conj(GAMMA[3]), GAMMA[3])


class PairingError(ValueError):
    pass


class TargetElement:
    """An element of the pairing target group (an r-th root of unity in Fp12)."""

    __slots__ = ("value",)

    def __init__(self, value):
        self.value = value

    def __mul__(self, other):
        return TargetElement(fq12_mul(self.value, other.value))

    def __pow__(self, exponent):
        return TargetElement(fq12_pow(self.value, int(exponent) % int(R)))

    def inverse(self):
        return TargetElement(fq12_conj(self.value))

    def __eq__(self, other):
        if isinstance(other, TargetElement):
            return self.value == other.value
        return NotImplemented

    def __hash__(self):
        return hash(_flatten(self.value))

    def is_one(self) -> bool:
        return self.value == FQ12_ONE

    def to_bytes(self) -> bytes:
        return b"".join(int(c).to_bytes(32, "big") for c in _flatten(self.value))

    @classmethod
    def one(cls):
        return cls(FQ12_ONE)


def _flatten(f):
    (c00, c01, c02), (c10, c11, c12) = f
    return tuple(x for pair in (c00, c01, c02, c10, c11, c12) for x in pair)


def _psi(q):
    return (fq2_mul(fq2_conj(q[0]), GAMMA[2]), fq2_mul(fq2_conj(q[1]), GAMMA[3]))


def _psi2(q):
    return (fq2_mul(q[0], _PSI2_X), fq2_mul(q[1], _PSI2_Y))


def _dbl_step(t):
    """Double the Jacobian G2 point t, returning (2t, line coefficients)."""
    X, Y, Z = t
    A = fq2_sqr(X)
    B = fq2_sqr(Y)
    C = fq2_sqr(B)
    D = fq2_sub(fq2_sub(fq2_sqr(fq2_add(X, B)), A), C)
    D = fq2_add(D, D)
    E = fq2_scale(A, 3)
    F = fq2_sqr(E)
    X3 = fq2_sub(F, fq2_add(D, D))
    Y3 = fq2_sub(fq2_mul(E, fq2_sub(D, X3)), fq2_scale(C, 8))
    ZZ = fq2_sqr(Z)
    Z3 = fq2_mul(fq2_add(Y, Y), Z)
    # Line through t with slope 3x^2/2y, scaled by 2YZ^3:
    #   l_y = -2YZ^3, l_x = 3X^2 Z^2, l_0 = 2Y^2 - 3X^3.
    l_y = fq2_neg(fq2_mul(Z3, ZZ))
    l_x = fq2_scale(fq2_mul(A, ZZ), 3)
    l_0 = fq2_sub(fq2_add(B, B), fq2_mul(E, X))
    return (X3, Y3, Z3), (l_y, l_x, l_0)


def _add_step(t, q):
    """Add affine q to Jacobian t, returning (t + q, line coefficients)."""
    X, Y, Z = t
    xq, yq = q
    ZZ = fq2_sqr(Z)
    U2 = fq2_mul(xq, ZZ)
    S2 = fq2_mul(fq2_mul(yq, ZZ), Z)
    H = fq2_sub(U2, X)
    rr = fq2_sub(S2, Y)
    HH = fq2_sqr(H)
    HHH = fq2_mul(H, HH)
    V = fq2_mul(X, HH)
    X3 = fq2_sub(fq2_sub(fq2_sqr(rr), HHH), fq2_add(V, V))
    Y3 = fq2_sub(fq2_mul(rr, fq2_sub(V, X3)), fq2_mul(Y, HHH))
    Z3 = fq2_mul(Z, H)
    # Line through t and q anchored at q, scaled by H*Z:
    #   l_y = -HZ, l_x = r, l_0 = HZ*yq - r*xq.
    l_y = fq2_neg(Z3)
    l_x = rr
    l_0 = fq2_sub(fq2_mul(Z3, yq), fq2_mul(rr, xq))
    return (X3, Y3, Z3), (l_y, l_x, l_0)


def precompute_g2(q):
    """All line coefficients the Miller loop will consume for this G2 point."""
    if q is None:
        raise PairingError("cannot precompute lines for the point at infinity")
    coeffs = []
    t = (q[0], q[1], FQ2_ONE)
    neg_q = (q[0], fq2_neg(q[1]))
    for digit in reversed(ATE_NAF[:-1]):
        t, c = _dbl_step(t)
        coeffs.append(c)
        if digit == 1:
            t, c = _add_step(t, q)
            coeffs.append(c)
        elif digit == -1:
            t, c = _add_step(t, neg_q)
            coeffs.append(c)
    q1 = _psi(q)
    q2 = _psi2(q)
    nq2 = (q2[0], fq2_neg(q2[1]))
    t, c = _add_step(t, q1)
    coeffs.append(c)
    _, c = _add_step(t, nq2)
    coeffs.append(c)
    return coeffs


def _mul_by_line(f, a, b, c):
    """Multiply f by the sparse element (a, 0, 0) + (b, c, 0) w."""
    f0, f1 = f
    t0 = fq6_scale_fq2(f0, a)
    t1 = fq6_mul_by_01(f1, b, c)
    r0 = fq6_add(t0, fq6_mul_by_v(t1))
    t2 = fq6_mul_by_01(fq6_add(f0, f1), fq2_add(a, b), c)
    r1 = fq6_sub(fq6_sub(t2, t0), t1)
    return (r0, r1)


def miller_product(pairs):
    """Shared Miller loop over [(g1_point, g2_lines)] with one running f.

    Entries whose G1 point is infinity contribute nothing (their pairing
    factor is 1). Returns the raw Fp12 value, pre final exponentiation.
    """
    live = []
    for pt, coeffs in pairs:
        if pt is None:
            continue
        live.append((mpz(pt[0]), mpz(pt[1]), coeffs))
    f = FQ12_ONE
    if not live:
        return f
    idx = 0
    for digit in reversed(ATE_NAF[:-1]):
        f = fq12_sqr(f)
        for x, y, coeffs in live:
            l_y, l_x, l_0 = coeffs[idx]
            f = _mul_by_line(f, fq2_scale(l_y, y), fq2_scale(l_x, x), l_0)
        idx += 1
        if digit:
            for x, y, coeffs in live:
                l_y, l_x, l_0 = coeffs[idx]
                f = _mul_by_line(f, fq2_scale(l_y, y), fq2_scale(l_x, x), l_0)
            idx += 1
    for _ in range(2):
        for x, y, coeffs in live:
            l_y, l_x, l_0 = coeffs[idx]
            f = _mul_by_line(f, fq2_scale(l_y, y), fq2_scale(l_x, x), l_0)
        idx += 1
    return f


def final_exponentiation(f):
    """Map a Miller value to the target group: f^((p^12-1)/r).

    Easy part by conjugate/inverse and Frobenius, hard part by the
    standard BN addition chain in x (checked against the plain
    integer-exponent route in the tests).
    """
    # Easy part: f^((p^6-1)(p^2+1)).
    f = fq12_mul(fq12_conj(f), fq12_inv(f))
    f = fq12_mul(fq12_frobenius_n(f, 2), f)

    # Hard part: f^((p^4 - p^2 + 1)/r).
    fx = fq12_cyclotomic_exp(f, BN_X)
    fx2 = fq12_cyclotomic_exp(fx, BN_X)
    fx3 = fq12_cyclotomic_exp(fx2, BN_X)
    y0 = fq12_mul(
        fq12_mul(fq12_frobenius(f), fq12_frobenius_n(f, 2)),
        fq12_frobenius_n(f, 3),
    )
    y1 = fq12_conj(f)
    y2 = fq12_frobenius_n(fx2, 2)
    y3 = fq12_conj(fq12_frobenius(fx))
    y4 = fq12_conj(fq12_mul(fx, fq12_frobenius(fx2)))
    y5 = fq12_conj(fx2)
    y6 = fq12_conj(fq12_mul(fx3, fq12_frobenius(fx3)))
    t0 = fq12_mul(fq12_mul(fq12_sqr(y6), y4), y5)
    t1 = fq12_mul(fq12_mul(y3, y5), t0)
    t0 = fq12_mul(t0, y2)
    t1 = fq12_mul(fq12_sqr(t1), t0)
    t1 = fq12_sqr(t1)
    t0 = fq12_mul(t1, y1)
    t1 = fq12_mul(t1, y0)
    t0 = fq12_sqr(t0)
    return fq12_mul(t0, t1)


def final_exponentiation_naive(f):
    """Direct (p^12-1)/r exponentiation; slow, kept as the test oracle."""
    return fq12_pow(f, (int(P) ** 12 - 1) // int(R))


def pairing(p, q, check: bool = True) -> TargetElement:
    """The bilinear map e(p, q) for p in G1 and q in G2."""
    if check:
        if not g1_is_on_curve(p):
            raise PairingError("G1 argument is not on the curve")
        if not g2_in_subgroup(q):
            raise PairingError("G2 argument is not in the r-torsion subgroup")
    if p is None or q is None:
        return TargetElement.one()
    f = miller_product([(p, precompute_g2(q))])
    return TargetElement(final_exponentiation(f))


def pairing_product(pairs) -> TargetElement:
    """prod e(p_i, q_i); each q may be a point or precomputed lines."""
    prepared = []
    for p, q in pairs:
        if p is None:
            continue
        if not isinstance(q, list):
            if q is None:
                continue
            q = precompute_g2(q)
        prepared.append((p, q))
    return TargetElement(final_exponentiation(miller_product(prepared)))
