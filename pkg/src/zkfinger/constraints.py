"""Rank-1 constraint systems and their quadratic-program form.

An R1CS instance is three sparse m x n matrices (A, B, C) over the
scalar field; a witness z (with z[0] = 1) satisfies it when
(A_k . z) * (B_k . z) = (C_k . z) for every row k. Rows come from circuit
gates one-for-one:

    mul gate   out = l * r :  A = e_l,        B = e_r,        C = e_out
    add gate   out = l + r :  A = e_0,        B = e_l + e_r,  C = e_out
    cmul gate  out = c * l :  A = e_0,        B = c * e_l,    C = e_out

where e_0 selects the constant-one variable. Public inputs are the
witness prefix and are bound by the verifier, not by extra rows, so the
matrices do not depend on the instance values.

The QAP form interpolates each matrix column over the domain x_j = j
(j = 1..m); divisibility of A(X)*B(X) - C(X) by the domain's vanishing
polynomial is then equivalent to satisfying every row.
"""

import struct

from .algebra.fields import R, inv_mod_r
from .algebra.poly import Polynomial

_R = int(R)

_MAGIC = b"R1CS"
_VERSION = 1


class ConstraintError(ValueError):
    pass


class R1CS:
    """Sparse constraint matrices; rows are dicts {var_index: coeff}."""

    def __init__(self, num_vars: int, num_public: int):
        if not 1 <= num_public <= num_vars:
            raise ConstraintError("public prefix must fit inside the variable vector")
        self.num_vars = num_vars
        self.num_public = num_public  # includes the constant-one variable
        self.a_rows = []
        self.b_rows = []
        self.c_rows = []

    @property
    def num_constraints(self) -> int:
        return len(self.a_rows)

    def add_row(self, a: dict, b: dict, c: dict) -> None:
        for row in (a, b, c):
            for idx in row:
                if not 0 <= idx < self.num_vars:
                    raise ConstraintError(f"variable index {idx} out of range")
        self.a_rows.append({i: v % _R for i, v in a.items() if v % _R})
        self.b_rows.append({i: v % _R for i, v in b.items() if v % _R})
        self.c_rows.append({i: v % _R for i, v in c.items() if v % _R})

    def row_products(self, witness, k: int):
        a = sum(coeff * witness[i] for i, coeff in self.a_rows[k].items()) % _R
        b = sum(coeff * witness[i] for i, coeff in self.b_rows[k].items()) % _R
        c = sum(coeff * witness[i] for i, coeff in self.c_rows[k].items()) % _R
        return a, b, c

    def check_satisfaction(self, witness) -> bool:
        """Row-by-row evaluation; this is the ground-truth predicate."""
        if len(witness) != self.num_vars:
            raise ConstraintError("witness length does not match variable count")
        if witness[0] % _R != 1:
            return False
        for k in range(self.num_constraints):
            a, b, c = self.row_products(witness, k)
            if a * b % _R != c:
                return False
        return True

    def to_bytes(self) -> bytes:
        out = [_MAGIC, struct.pack("<BIII", _VERSION, self.num_constraints, self.num_vars, self.num_public)]
        for k in range(self.num_constraints):
            for rows in (self.a_rows, self.b_rows, self.c_rows):
                row = rows[k]
                out.append(struct.pack("<I", len(row)))
                for idx in sorted(row):
                    out.append(struct.pack("<I", idx))
                    out.append(int(row[idx]).to_bytes(32, "little"))
        return b"".join(out)

    @classmethod
    def from_bytes(cls, data: bytes) -> "R1CS":
        if data[:4] != _MAGIC:
            raise ConstraintError("bad constraint-system magic")
        version, m, n, l = struct.unpack_from("<BIII", data, 4)
        if version != _VERSION:
            raise ConstraintError(f"unsupported constraint-system version {version}")
        system = cls(n, l)
        offset = 17
        for _ in range(m):
            rows = []
            for _ in range(3):
                (count,) = struct.unpack_from("<I", data, offset)
                offset += 4
                row = {}
                for _ in range(count):
                    (idx,) = struct.unpack_from("<I", data, offset)
                    offset += 4
                    row[idx] = int.from_bytes(data[offset : offset + 32], "little")
                    offset += 32
                rows.append(row)
            system.add_row(*rows)
        if offset != len(data):
            raise ConstraintError("trailing bytes after constraint rows")
        return system


class QAP:
    """Quadratic-program view of an R1CS over the domain 1..m."""

    def __init__(self, r1cs: R1CS):
        if r1cs.num_constraints == 0:
            raise ConstraintError("cannot build a quadratic program from zero rows")
        self.r1cs = r1cs
        self.domain = list(range(1, r1cs.num_constraints + 1))
        self.z_poly = Polynomial.vanishing(self.domain)
        # Z'(x_j) for barycentric weights over the 1..m integer domain:
        # prod_{i != j} (j - i) = (j-1)! * (m-j)! * (-1)^(m-j).
        m = r1cs.num_constraints
        fact = [1] * (m + 1)
        for i in range(1, m + 1):
            fact[i] = fact[i - 1] * i % _R
        self._weights = []
        for j in range(1, m + 1):
            w = fact[j - 1] * fact[m - j] % _R
            if (m - j) & 1:
                w = _R - w
            self._weights.append(inv_mod_r(w))

    @property
    def num_vars(self) -> int:
        return self.r1cs.num_vars

    @property
    def degree(self) -> int:
        return self.r1cs.num_constraints

    def lagrange_basis_at(self, tau: int):
        """[l_j(tau)] for the whole domain, via barycentric weights."""
        tau = int(tau) % _R
        if tau in set(self.domain):
            return [1 if x == tau else 0 for x in self.domain]
        z_at_tau = self.z_poly(tau)
        return [
            z_at_tau * self._weights[j] % _R * inv_mod_r((tau - x) % _R) % _R
            for j, x in enumerate(self.domain)
        ]

    def evaluate_columns_at(self, tau: int):
        """(A_i(tau), B_i(tau), C_i(tau)) for every variable i.

        Works through the sparse rows, so the cost is the number of
        non-zero matrix entries rather than n * m^2.
        """
        basis = self.lagrange_basis_at(tau)
        n = self.num_vars
        a_vals = [0] * n
        b_vals = [0] * n
        c_vals = [0] * n
        for j in range(self.degree):
            lj = basis[j]
            if not lj:
                continue
            for i, coeff in self.r1cs.a_rows[j].items():
                a_vals[i] = (a_vals[i] + coeff * lj) % _R
            for i, coeff in self.r1cs.b_rows[j].items():
                b_vals[i] = (b_vals[i] + coeff * lj) % _R
            for i, coeff in self.r1cs.c_rows[j].items():
                c_vals[i] = (c_vals[i] + coeff * lj) % _R
        return a_vals, b_vals, c_vals

    def variable_polynomial(self, matrix: str, i: int) -> Polynomial:
        """The interpolated column polynomial; O(m^2), for inspection/tests."""
        rows = {"a": self.r1cs.a_rows, "b": self.r1cs.b_rows, "c": self.r1cs.c_rows}[matrix]
        points = [(x, rows[j].get(i, 0)) for j, x in enumerate(self.domain)]
        return Polynomial.interpolate(points)

    def combined_polynomials(self, witness):
        """A(X), B(X), C(X) for a concrete witness."""
        evals = {"a": [], "b": [], "c": []}
        for k in range(self.degree):
            a, b, c = self.r1cs.row_products(witness, k)
            evals["a"].append(a)
            evals["b"].append(b)
            evals["c"].append(c)
        return tuple(
            Polynomial.interpolate(list(zip(self.domain, evals[key])))
            for key in ("a", "b", "c")
        )

    def compute_h(self, witness) -> Polynomial:
        """H with A*B - C = H*Z; fails if the witness does not satisfy."""
        a_poly, b_poly, c_poly = self.combined_polynomials(witness)
        numerator = a_poly * b_poly - c_poly
        quotient, remainder = numerator.divmod(self.z_poly)
        if not remainder.is_zero():
            raise ConstraintError("witness does not satisfy the constraint system")
        return quotient

    def divisibility_holds(self, witness) -> bool:
        """QAP-side satisfaction predicate (dual of check_satisfaction)."""
        a_poly, b_poly, c_poly = self.combined_polynomials(witness)
        _, remainder = (a_poly * b_poly - c_poly).divmod(self.z_poly)
        return remainder.is_zero()
