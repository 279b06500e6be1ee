"""Group arithmetic on BN254: G1 over Fp, G2 over Fp2 (the sextic twist).

Points are exposed as affine tuples (x, y) with None standing for the
point at infinity; scalar multiplication runs in Jacobian coordinates
internally. Serialized form is x-coordinate plus flag bits:

    G1: 32 bytes big-endian; top bit = infinity, next bit = parity of y.
    G2: 64 bytes = x1 || x0 (each 32 bytes big-endian); flags share the
        first byte, parity taken from y0 (falling back to y1 if y0 = 0).

The base field is 254 bits so both flag bits fit above the coordinate.
"""

from gmpy2 import mpz, invert

from .fields import (
    P,
    R,
    fq2,
    fq2_add,
    fq2_sub,
    fq2_neg,
    fq2_mul,
    fq2_sqr,
    fq2_scale,
    fq2_inv,
    fq2_mul_by_xi,
    FQ2_ZERO,
    FQ2_ONE,
)

B1 = mpz(3)  # G1: y^2 = x^3 + 3
# G2 twist: y^2 = x^3 + 3/xi
B2 = fq2_mul(fq2(3, 0), fq2_inv(fq2(9, 1)))

G1_GEN = (mpz(1), mpz(2))
G2_GEN = (
    fq2(
        10857046999023057135944570762232829481370756359578518086990519993285655852781,
        11559732032986387107991004021392285783925812861821192530917403151452391805634,
    ),
    fq2(
        8495653923123431417604973247489272438418190587263600148770280649306958101930,
        4082367875863433681332203403145435568316851327593401208105741076214120093531,
    ),
)


class GroupError(ValueError):
    """Raised when bytes or coordinates do not describe a valid group element."""


# ---------------------------------------------------------------------------
# G1


def g1_is_on_curve(pt) -> bool:
    if pt is None:
        return True
    x, y = pt
    return (y * y - x * x * x - B1) % P == 0


def g1_neg(pt):
    if pt is None:
        return None
    return (pt[0], (-pt[1]) % P)


def g1_add(a, b):
    if a is None:
        return b
    if b is None:
        return a
    x1, y1 = a
    x2, y2 = b
    if x1 == x2:
        if (y1 + y2) % P == 0:
            return None
        lam = 3 * x1 * x1 % P * invert(2 * y1, P) % P
    else:
        lam = (y2 - y1) * invert(x2 - x1, P) % P
    x3 = (lam * lam - x1 - x2) % P
    return (x3, (lam * (x1 - x3) - y1) % P)


def _g1_jac_dbl(pt):
    X, Y, Z = pt
    if not Y:
        return (mpz(1), mpz(1), mpz(0))
    A = X * X % P
    B = Y * Y % P
    C = B * B % P
    D = 2 * ((X + B) * (X + B) - A - C) % P
    E = 3 * A % P
    F = E * E % P
    X3 = (F - 2 * D) % P
    Y3 = (E * (D - X3) - 8 * C) % P
    Z3 = 2 * Y * Z % P
    return (X3, Y3, Z3)


def _g1_jac_add_affine(pt, aff):
    # Mixed addition: pt in Jacobian, aff in affine coordinates.
    X1, Y1, Z1 = pt
    if not Z1:
        return (aff[0], aff[1], mpz(1))
    x2, y2 = aff
    Z1Z1 = Z1 * Z1 % P
    U2 = x2 * Z1Z1 % P
    S2 = y2 * Z1 * Z1Z1 % P
    H = (U2 - X1) % P
    rr = (S2 - Y1) % P
    if not H:
        if not rr:
            return _g1_jac_dbl(pt)
        return (mpz(1), mpz(1), mpz(0))
    HH = H * H % P
    HHH = H * HH % P
    V = X1 * HH % P
    X3 = (rr * rr - HHH - 2 * V) % P
    Y3 = (rr * (V - X3) - Y1 * HHH) % P
    Z3 = Z1 * H % P
    return (X3, Y3, Z3)


def _g1_jac_to_affine(pt):
    X, Y, Z = pt
    if not Z:
        return None
    zinv = invert(Z, P)
    z2 = zinv * zinv % P
    return (X * z2 % P, Y * z2 * zinv % P)


def g1_mul(pt, k):
    k = int(k) % int(R)
    if pt is None or k == 0:
        return None
    acc = (mpz(1), mpz(1), mpz(0))
    for bit in bin(k)[2:]:
        acc = _g1_jac_dbl(acc)
        if bit == "1":
            acc = _g1_jac_add_affine(acc, pt)
    return _g1_jac_to_affine(acc)


def g1_msm(points, scalars):
    """Multi-scalar product sum(k_i * P_i) with one batched normalization."""
    acc = (mpz(1), mpz(1), mpz(0))
    for pt, k in zip(points, scalars):
        k = int(k) % int(R)
        if pt is None or k == 0:
            continue
        part = (mpz(1), mpz(1), mpz(0))
        for bit in bin(k)[2:]:
            part = _g1_jac_dbl(part)
            if bit == "1":
                part = _g1_jac_add_affine(part, pt)
        if not acc[2]:
            acc = part
        else:
            aff = _g1_jac_to_affine(part)
            if aff is not None:
                acc = _g1_jac_add_affine(acc, aff)
    return _g1_jac_to_affine(acc)


def g1_to_bytes(pt) -> bytes:
    if pt is None:
        out = bytearray(32)
        out[0] = 0x80
        return bytes(out)
    x, y = pt
    out = bytearray(int(x).to_bytes(32, "big"))
    if y & 1:
        out[0] |= 0x40
    return bytes(out)


def g1_from_bytes(data: bytes):
    if len(data) != 32:
        raise GroupError("G1 encoding must be 32 bytes")
    flags = data[0] & 0xC0
    if flags & 0x80:
        if any(data[1:]) or data[0] != 0x80:
            raise GroupError("malformed G1 infinity encoding")
        return None
    x = mpz(int.from_bytes(bytes([data[0] & 0x3F]) + data[1:], "big"))
    if x >= P:
        raise GroupError("G1 x-coordinate out of range")
    y = _sqrt_fp((x * x * x + B1) % P)
    if y is None:
        raise GroupError("G1 x-coordinate not on curve")
    if (y & 1) != bool(flags & 0x40):
        y = (-y) % P
    return (x, y)


def _sqrt_fp(a):
    a = a % P
    if a == 0:
        return mpz(0)
    root = pow(a, (P + 1) // 4, P)
    if root * root % P != a:
        return None
    return mpz(root)


# ---------------------------------------------------------------------------
# G2 (coordinates in Fp2)


def g2_is_on_curve(pt) -> bool:
    if pt is None:
        return True
    x, y = pt
    lhs = fq2_sqr(y)
    rhs = fq2_add(fq2_mul(fq2_sqr(x), x), B2)
    return lhs == rhs


def g2_neg(pt):
    if pt is None:
        return None
    return (pt[0], fq2_neg(pt[1]))


def g2_add(a, b):
    if a is None:
        return b
    if b is None:
        return a
    x1, y1 = a
    x2, y2 = b
    if x1 == x2:
        if fq2_add(y1, y2) == FQ2_ZERO:
            return None
        num = fq2_scale(fq2_sqr(x1), 3)
        lam = fq2_mul(num, fq2_inv(fq2_scale(y1, 2)))
    else:
        lam = fq2_mul(fq2_sub(y2, y1), fq2_inv(fq2_sub(x2, x1)))
    x3 = fq2_sub(fq2_sub(fq2_sqr(lam), x1), x2)
    return (x3, fq2_sub(fq2_mul(lam, fq2_sub(x1, x3)), y1))


def g2_double(a):
    return g2_add(a, a)


def g2_mul(pt, k):
    k = int(k) % int(R)
    if pt is None or k == 0:
        return None
    acc = None
    for bit in bin(k)[2:]:
        acc = g2_add(acc, acc)
        if bit == "1":
            acc = g2_add(acc, pt)
    return acc


def g2_msm(points, scalars):
    acc = None
    for pt, k in zip(points, scalars):
        k = int(k) % int(R)
        if pt is None or k == 0:
            continue
        acc = g2_add(acc, g2_mul(pt, k))
    return acc


def g2_in_subgroup(pt) -> bool:
    # The scalar here must NOT be reduced mod r: the whole point is to
    # multiply by r itself and land on infinity only for r-torsion points.
    if not g2_is_on_curve(pt):
        return False
    if pt is None:
        return True
    acc = None
    for bit in bin(int(R))[2:]:
        acc = g2_add(acc, acc)
        if bit == "1":
            acc = g2_add(acc, pt)
    return acc is None


def g2_to_bytes(pt) -> bytes:
    if pt is None:
        out = bytearray(64)
        out[0] = 0x80
        return bytes(out)
    (x0, x1), (y0, y1) = pt
    out = bytearray(int(x1).to_bytes(32, "big") + int(x0).to_bytes(32, "big"))
    parity = (y0 & 1) if y0 else (y1 & 1)
    if parity:
        out[0] |= 0x40
    return bytes(out)


def g2_from_bytes(data: bytes):
    if len(data) != 64:
        raise GroupError("G2 encoding must be 64 bytes")
    flags = data[0] & 0xC0
    if flags & 0x80:
        if any(data[1:]) or data[0] != 0x80:
            raise GroupError("malformed G2 infinity encoding")
        return None
    x1 = mpz(int.from_bytes(bytes([data[0] & 0x3F]) + data[1:32], "big"))
    x0 = mpz(int.from_bytes(data[32:], "big"))
    if x0 >= P or x1 >= P:
        raise GroupError("G2 x-coordinate out of range")
    x = (x0, x1)
    y = _sqrt_fp2(fq2_add(fq2_mul(fq2_sqr(x), x), B2))
    if y is None:
        raise GroupError("G2 x-coordinate not on curve")
    parity = (y[0] & 1) if y[0] else (y[1] & 1)
    if parity != bool(flags & 0x40):
        y = fq2_neg(y)
    return (x, y)


def _sqrt_fp2(c):
    c0, c1 = c
    if c1 == 0:
        root = _sqrt_fp(c0)
        if root is not None:
            return (root, mpz(0))
        # sqrt lies along u: (a*u)^2 = -a^2  =>  need sqrt(-c0)
        root = _sqrt_fp((-c0) % P)
        if root is None:
            return None
        return (mpz(0), root)
    # Complex-extension method: with delta = sqrt(c0^2 + c1^2),
    # x0 = sqrt((c0 + delta)/2) and x1 = c1/(2 x0).
    delta = _sqrt_fp((c0 * c0 + c1 * c1) % P)
    if delta is None:
        return None
    inv2 = invert(2, P)
    for d in (delta, (-delta) % P):
        half = (c0 + d) * inv2 % P
        x0 = _sqrt_fp(half)
        if x0 is None or x0 == 0:
            continue
        x1 = c1 * invert(2 * x0, P) % P
        cand = (x0, x1)
        if fq2_sqr(cand) == (c0 % P, c1 % P):
            return cand
    return None


# Generators must be valid and have the right order; a broken constant
# would otherwise poison everything built on top.
assert g1_is_on_curve(G1_GEN)
assert g2_is_on_curve(G2_GEN)
assert g1_mul(G1_GEN, R) is None
assert g2_mul(G2_GEN, R) is None
