"""Dense univariate polynomials over the scalar field.

Coefficients are plain ints mod R, lowest degree first; the zero
polynomial is the empty list. This is the representation the QAP layer
leans on, so the operations here stay allocation-light.
"""

from .fields import R, FieldElement, inv_mod_r

_R = int(R)


class InterpolationError(ValueError):
    """Raised when interpolation points share an x-coordinate."""


class Polynomial:
    __slots__ = ("coeffs",)

    def __init__(self, coeffs=()):
        coeffs = [int(c) % _R for c in coeffs]
        while coeffs and coeffs[-1] == 0:
            coeffs.pop()
        self.coeffs = coeffs

    @property
    def degree(self) -> int:
        """Degree with the usual convention deg(0) = -1."""
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    def __eq__(self, other):
        if isinstance(other, Polynomial):
            return self.coeffs == other.coeffs
        return NotImplemented

    def __hash__(self):
        return hash(tuple(self.coeffs))

    def __repr__(self):
        return f"Polynomial({self.coeffs})"

    def __add__(self, other):
        a, b = self.coeffs, other.coeffs
        if len(a) < len(b):
            a, b = b, a
        out = list(a)
        for i, c in enumerate(b):
            out[i] = (out[i] + c) % _R
        return Polynomial(out)

    def __sub__(self, other):
        out = list(self.coeffs)
        out.extend([0] * (len(other.coeffs) - len(out)))
        for i, c in enumerate(other.coeffs):
            out[i] = (out[i] - c) % _R
        return Polynomial(out)

    def __neg__(self):
        return Polynomial([-c for c in self.coeffs])

    def __mul__(self, other):
        if isinstance(other, (int, FieldElement)):
            k = int(other) if isinstance(other, int) else other.value
            return Polynomial([c * k % _R for c in self.coeffs])
        a, b = self.coeffs, other.coeffs
        if not a or not b:
            return Polynomial()
        out = [0] * (len(a) + len(b) - 1)
        for i, ai in enumerate(a):
            if ai:
                for j, bj in enumerate(b):
                    out[i + j] += ai * bj
        return Polynomial([c % _R for c in out])

    __rmul__ = __mul__

    def __call__(self, x) -> int:
        x = int(x) % _R
        acc = 0
        for c in reversed(self.coeffs):
            acc = (acc * x + c) % _R
        return acc

    def divmod(self, divisor):
        """Quotient and remainder; deg(remainder) < deg(divisor)."""
        if divisor.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        rem = list(self.coeffs)
        dcoeffs = divisor.coeffs
        dlead_inv = inv_mod_r(dcoeffs[-1])
        dlen = len(dcoeffs)
        if len(rem) < dlen:
            return Polynomial(), Polynomial(rem)
        quot = [0] * (len(rem) - dlen + 1)
        for i in range(len(quot) - 1, -1, -1):
            factor = rem[i + dlen - 1] * dlead_inv % _R
            if factor:
                quot[i] = factor
                for j, dc in enumerate(dcoeffs):
                    rem[i + j] = (rem[i + j] - factor * dc) % _R
        return Polynomial(quot), Polynomial(rem[: dlen - 1])

    @classmethod
    def interpolate(cls, points) -> "Polynomial":
        """Unique polynomial of degree < n through n (x, y) points.

        Newton's divided differences; duplicate x-coordinates are
        rejected rather than silently producing a division by zero.
        """
        xs = [int(x) % _R for x, _ in points]
        ys = [int(y) % _R for _, y in points]
        if len(set(xs)) != len(xs):
            raise InterpolationError("interpolation points must have distinct x")
        if not xs:
            return cls()
        # Divided-difference coefficients, computed in place.
        coef = list(ys)
        n = len(xs)
        for level in range(1, n):
            for i in range(n - 1, level - 1, -1):
                denom = (xs[i] - xs[i - level]) % _R
                coef[i] = (coef[i] - coef[i - 1]) * inv_mod_r(denom) % _R
        # Expand the Newton form into monomial coefficients.
        poly = [coef[-1]]
        for i in range(n - 2, -1, -1):
            poly = _mul_linear(poly, xs[i])
            poly[0] = (poly[0] + coef[i]) % _R
        return cls(poly)

    @classmethod
    def vanishing(cls, xs) -> "Polynomial":
        """prod (X - x) over the given domain points."""
        poly = [1]
        for x in xs:
            poly = _mul_linear(poly, int(x) % _R)
        return cls(poly)


def _mul_linear(coeffs, root):
    """coeffs * (X - root), both lowest-degree-first int lists."""
    out = [0] + list(coeffs)
    for i, c in enumerate(coeffs):
        out[i] = (out[i] - c * root) % _R
    return [c % _R for c in out]
