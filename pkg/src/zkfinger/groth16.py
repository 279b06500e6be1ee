"""Pairing-based proof system over the quadratic-program form.

Keys come out of a simulated multi-party ceremony: phase 1 accumulates
the universal scalars (tau, alpha, beta) across sequential contributors
with a hash-chained transcript, phase 2 specializes to one circuit
(gamma, delta and the derived query vectors). Every contributor's
commitment feeds the next one's randomness derivation, so replaying a
transcript with the seeds reproduces the keys exactly.

Proofs are three group elements (A in G1, B in G2, C in G1); the
verification equation is

    e(A, B) = e(alpha, beta) * e(L, gamma) * e(C, delta)

with L the public-input linear combination. Verification batches the
three variable pairings through one shared Miller loop and one final
exponentiation, against precomputed line coefficients for the fixed
gamma / delta points.
"""

import hashlib
import secrets
import struct
from dataclasses import dataclass, field

from .algebra.curve import (
    G1_GEN,
    G2_GEN,
    GroupError,
    g1_add,
    g1_from_bytes,
    g1_is_on_curve,
    g1_msm,
    g1_mul,
    g1_neg,
    g1_to_bytes,
    g2_add,
    g2_from_bytes,
    g2_in_subgroup,
    g2_is_on_curve,
    g2_msm,
    g2_mul,
    g2_to_bytes,
)
from .algebra.fields import R, inv_mod_r
from .algebra.pairing import (
    TargetElement,
    final_exponentiation,
    miller_product,
    pairing,
    precompute_g2,
)

_R = int(R)

PROOF_SIZE = 128
ENVELOPE_MAGIC = b"ZKFP"
ENVELOPE_VERSION = 1
_PK_MAGIC = b"ZKPK"
_VK_MAGIC = b"ZKVK"
_KEY_VERSION = 1


class SetupError(ValueError):
    pass


class ProvingError(ValueError):
    pass


class VerificationError(ValueError):
    pass


# -- ceremony ---------------------------------------------------------------


@dataclass(frozen=True)
class Contribution:
    phase: int
    index: int
    commitment: bytes
    transcript_hash: bytes


@dataclass(frozen=True)
class SetupTranscript:
    circuit_digest: bytes
    contributions: tuple

    @property
    def final_hash(self) -> bytes:
        return self.contributions[-1].transcript_hash


def _derive_scalars(count: int, phase: int, index: int, seed, prev_hash: bytes):
    """Contributor randomness; seeded for reproducible ceremonies."""
    if seed is None:
        return [secrets.randbelow(_R - 1) + 1 for _ in range(count)]
    shake = hashlib.shake_256(
        b"ceremony-v1" + bytes([phase]) + struct.pack("<I", index) + seed + prev_hash
    )
    material = shake.digest(40 * count)
    return [
        int.from_bytes(material[40 * i : 40 * (i + 1)], "little") % (_R - 1) + 1
        for i in range(count)
    ]


@dataclass
class ProvingKey:
    circuit_digest: bytes
    num_public: int
    alpha_g1: tuple
    beta_g1: tuple
    beta_g2: tuple
    delta_g1: tuple
    delta_g2: tuple
    tau_g1: list  # [tau^i]G1, i = 0..m-1
    tau_g2: list  # [tau^i]G2, i = 0..m-1
    a_query: list  # [A_i(tau)]G1, all variables
    b_g1_query: list
    b_g2_query: list
    l_query: list  # [(beta*A_i + alpha*B_i + C_i)/delta]G1, private variables
    h_query: list  # [tau^i * Z(tau)/delta]G1, i = 0..m-2

    def to_bytes(self) -> bytes:
        out = [
            _PK_MAGIC,
            struct.pack("<B", _KEY_VERSION),
            self.circuit_digest,
            struct.pack(
                "<III", len(self.tau_g1), len(self.a_query), self.num_public
            ),
            g1_to_bytes(self.alpha_g1),
            g1_to_bytes(self.beta_g1),
            g2_to_bytes(self.beta_g2),
            g1_to_bytes(self.delta_g1),
            g2_to_bytes(self.delta_g2),
        ]
        out.extend(g1_to_bytes(p) for p in self.tau_g1)
        out.extend(g2_to_bytes(p) for p in self.tau_g2)
        out.extend(g1_to_bytes(p) for p in self.a_query)
        out.extend(g1_to_bytes(p) for p in self.b_g1_query)
        out.extend(g2_to_bytes(p) for p in self.b_g2_query)
        out.extend(g1_to_bytes(p) for p in self.l_query)
        out.extend(g1_to_bytes(p) for p in self.h_query)
        return b"".join(out)

    @classmethod
    def from_bytes(cls, data: bytes) -> "ProvingKey":
        if len(data) < 49 or data[:4] != _PK_MAGIC:
            raise SetupError("bad proving-key magic")
        if data[4] != _KEY_VERSION:
            raise SetupError("unsupported proving-key version")
        digest = data[5:37]
        m, n, num_public = struct.unpack_from("<III", data, 37)
        if num_public > n or m < 1:
            raise SetupError("inconsistent proving-key header")
        expected = 49 + 32 * (3 + 3 * n - num_public + 2 * m - 1) + 64 * (2 + m + n)
        if len(data) != expected:
            raise SetupError("proving key has the wrong size")
        off = 49

        def g1(count):
            nonlocal off
            pts = [g1_from_bytes(data[off + 32 * i : off + 32 * (i + 1)]) for i in range(count)]
            off += 32 * count
            return pts

        def g2(count):
            nonlocal off
            pts = [g2_from_bytes(data[off + 64 * i : off + 64 * (i + 1)]) for i in range(count)]
            off += 64 * count
            return pts

        alpha_g1 = g1(1)[0]
        beta_g1 = g1(1)[0]
        beta_g2 = g2(1)[0]
        delta_g1 = g1(1)[0]
        delta_g2 = g2(1)[0]
        key = cls(
            circuit_digest=digest,
            num_public=num_public,
            alpha_g1=alpha_g1,
            beta_g1=beta_g1,
            beta_g2=beta_g2,
            delta_g1=delta_g1,
            delta_g2=delta_g2,
            tau_g1=g1(m),
            tau_g2=g2(m),
            a_query=g1(n),
            b_g1_query=g1(n),
            b_g2_query=g2(n),
            l_query=g1(n - num_public),
            h_query=g1(m - 1),
        )
        if off != len(data):
            raise SetupError("trailing bytes in proving key")
        return key


@dataclass
class VerificationKey:
    circuit_digest: bytes
    alpha_g1: tuple
    beta_g2: tuple
    gamma_g2: tuple
    delta_g2: tuple
    ic: list  # public-input query, length num_public
    _prepared: dict = field(default=None, repr=False, compare=False)

    def to_bytes(self) -> bytes:
        out = [
            _VK_MAGIC,
            struct.pack("<B", _KEY_VERSION),
            self.circuit_digest,
            struct.pack("<I", len(self.ic)),
            g1_to_bytes(self.alpha_g1),
            g2_to_bytes(self.beta_g2),
            g2_to_bytes(self.gamma_g2),
            g2_to_bytes(self.delta_g2),
        ]
        out.extend(g1_to_bytes(p) for p in self.ic)
        return b"".join(out)

    @classmethod
    def from_bytes(cls, data: bytes) -> "VerificationKey":
        if len(data) < 41 or data[:4] != _VK_MAGIC:
            raise SetupError("bad verification-key magic")
        if data[4] != _KEY_VERSION:
            raise SetupError("unsupported verification-key version")
        digest = data[5:37]
        (count,) = struct.unpack_from("<I", data, 37)
        if len(data) != 41 + 32 + 3 * 64 + 32 * count:
            raise SetupError("verification key has the wrong size")
        off = 41
        alpha_g1 = g1_from_bytes(data[off : off + 32]); off += 32
        beta_g2 = g2_from_bytes(data[off : off + 64]); off += 64
        gamma_g2 = g2_from_bytes(data[off : off + 64]); off += 64
        delta_g2 = g2_from_bytes(data[off : off + 64]); off += 64
        ic = []
        for _ in range(count):
            ic.append(g1_from_bytes(data[off : off + 32]))
            off += 32
        if off != len(data):
            raise SetupError("trailing bytes in verification key")
        return cls(digest, alpha_g1, beta_g2, gamma_g2, delta_g2, ic)

    def prepared(self) -> dict:
        """Cache the fixed-point pairing work (lines, e(alpha, beta))."""
        if self._prepared is None:
            for pt in (self.beta_g2, self.gamma_g2, self.delta_g2):
                if not (g2_is_on_curve(pt) and g2_in_subgroup(pt)):
                    raise VerificationError("verification key contains an invalid point")
            self._prepared = {
                "gamma": precompute_g2(self.gamma_g2),
                "delta": precompute_g2(self.delta_g2),
                "e_alpha_beta": pairing(self.alpha_g1, self.beta_g2, check=False),
            }
        return self._prepared


@dataclass(frozen=True)
class Proof:
    a: tuple
    b: tuple
    c: tuple

    def to_bytes(self) -> bytes:
        blob = g1_to_bytes(self.a) + g2_to_bytes(self.b) + g1_to_bytes(self.c)
        assert len(blob) == PROOF_SIZE
        return blob

    @classmethod
    def from_bytes(cls, data: bytes) -> "Proof":
        if len(data) != PROOF_SIZE:
            raise VerificationError(f"proof must be {PROOF_SIZE} bytes, got {len(data)}")
        return cls(
            g1_from_bytes(data[0:32]),
            g2_from_bytes(data[32:96]),
            g1_from_bytes(data[96:128]),
        )


def setup(qap, circuit_digest: bytes, contributors: int = 3, seeds=None):
    """Run the simulated ceremony; returns (pk, vk, transcript).

    `seeds` (one bytes object per contributor, or None for system
    randomness) makes the ceremony reproducible. Toxic scalars live only
    inside this frame.
    """
    if contributors < 1:
        raise SetupError("need at least one contributor")
    if seeds is not None and len(seeds) != contributors:
        raise SetupError("one seed per contributor required")
    if len(circuit_digest) != 32:
        raise SetupError("circuit digest must be 32 bytes")

    tau = alpha = beta = gamma = delta = 1
    contributions = []
    prev_hash = hashlib.sha256(b"ceremony-v1" + circuit_digest).digest()

    # Phase 1: universal scalars.
    for index in range(contributors):
        seed = None if seeds is None else seeds[index]
        t_i, a_i, b_i = _derive_scalars(3, 1, index, seed, prev_hash)
        tau = tau * t_i % _R
        alpha = alpha * a_i % _R
        beta = beta * b_i % _R
        commitment = (
            g1_to_bytes(g1_mul(G1_GEN, t_i))
            + g1_to_bytes(g1_mul(G1_GEN, a_i))
            + g1_to_bytes(g1_mul(G1_GEN, b_i))
        )
        prev_hash = hashlib.sha256(prev_hash + commitment).digest()
        contributions.append(Contribution(1, index, commitment, prev_hash))

    # Phase 2: circuit-specific scalars.
    for index in range(contributors):
        seed = None if seeds is None else seeds[index]
        g_i, d_i = _derive_scalars(2, 2, index, seed, prev_hash)
        gamma = gamma * g_i % _R
        delta = delta * d_i % _R
        commitment = g2_to_bytes(g2_mul(G2_GEN, g_i)) + g2_to_bytes(g2_mul(G2_GEN, d_i))
        prev_hash = hashlib.sha256(prev_hash + commitment).digest()
        contributions.append(Contribution(2, index, commitment, prev_hash))

    m = qap.degree
    n = qap.num_vars
    num_public = qap.r1cs.num_public
    if tau in set(qap.domain):
        raise SetupError("degenerate ceremony randomness; rerun with fresh seeds")

    a_vals, b_vals, c_vals = qap.evaluate_columns_at(tau)
    z_at_tau = qap.z_poly(tau)
    inv_gamma = int(inv_mod_r(gamma))
    inv_delta = int(inv_mod_r(delta))

    tau_powers = [1] * m
    for i in range(1, m):
        tau_powers[i] = tau_powers[i - 1] * tau % _R

    ic = [
        g1_mul(G1_GEN, (beta * a_vals[i] + alpha * b_vals[i] + c_vals[i]) * inv_gamma % _R)
        for i in range(num_public)
    ]
    l_query = [
        g1_mul(G1_GEN, (beta * a_vals[i] + alpha * b_vals[i] + c_vals[i]) * inv_delta % _R)
        for i in range(num_public, n)
    ]
    h_query = [
        g1_mul(G1_GEN, tau_powers[i] * z_at_tau % _R * inv_delta % _R) for i in range(m - 1)
    ]

    pk = ProvingKey(
        circuit_digest=circuit_digest,
        num_public=num_public,
        alpha_g1=g1_mul(G1_GEN, alpha),
        beta_g1=g1_mul(G1_GEN, beta),
        beta_g2=g2_mul(G2_GEN, beta),
        delta_g1=g1_mul(G1_GEN, delta),
        delta_g2=g2_mul(G2_GEN, delta),
        tau_g1=[g1_mul(G1_GEN, p) for p in tau_powers],
        tau_g2=[g2_mul(G2_GEN, p) for p in tau_powers],
        a_query=[g1_mul(G1_GEN, v) for v in a_vals],
        b_g1_query=[g1_mul(G1_GEN, v) for v in b_vals],
        b_g2_query=[g2_mul(G2_GEN, v) for v in b_vals],
        l_query=l_query,
        h_query=h_query,
    )
    vk = VerificationKey(
        circuit_digest=circuit_digest,
        alpha_g1=pk.alpha_g1,
        beta_g2=pk.beta_g2,
        gamma_g2=g2_mul(G2_GEN, gamma),
        delta_g2=pk.delta_g2,
        ic=ic,
    )
    return pk, vk, SetupTranscript(circuit_digest, tuple(contributions))


def verify_phase1(pk: ProvingKey) -> bool:
    """Consistency of the published power ladders.

    Checks e(tau^{i+1} G1, G2) = e(tau^i G1, tau G2) along the G1 ladder
    and the mirrored identity along the G2 ladder. Quadratic pairing
    cost; meant for auditing small-circuit ceremonies and tests.
    """
    m = len(pk.tau_g1)
    if m != len(pk.tau_g2):
        return False
    if pk.tau_g1[0] != G1_GEN or pk.tau_g2[0] != G2_GEN:
        return False
    if m == 1:
        return True
    tau_g2_1 = precompute_g2(pk.tau_g2[1])
    gen_g2 = precompute_g2(G2_GEN)
    for i in range(m - 1):
        lhs = miller_product([(pk.tau_g1[i + 1], gen_g2), (g1_neg(pk.tau_g1[i]), tau_g2_1)])
        if not TargetElement(final_exponentiation(lhs)).is_one():
            return False
        rhs = miller_product([(G1_GEN, precompute_g2(pk.tau_g2[i + 1])),
                              (g1_neg(pk.tau_g1[1]), precompute_g2(pk.tau_g2[i]))])
        if not TargetElement(final_exponentiation(rhs)).is_one():
            return False
    return True


def prove(pk: ProvingKey, qap, witness, rng=None) -> Proof:
    """Produce a proof for a satisfying witness.

    `rng` (an object with randrange) makes the blinding scalars
    reproducible; by default they come from the system CSPRNG.
    """
    if len(witness) != qap.num_vars:
        raise ProvingError("witness length does not match the constraint system")
    if not qap.r1cs.check_satisfaction(witness):
        raise ProvingError("witness does not satisfy the constraint system")

    witness = [int(v) % _R for v in witness]
    if rng is None:
        r = secrets.randbelow(_R)
        s = secrets.randbelow(_R)
    else:
        r = rng.randrange(_R)
        s = rng.randrange(_R)

    h_coeffs = qap.compute_h(witness).coeffs
    if len(h_coeffs) > len(pk.h_query):
        raise ProvingError("quotient degree exceeds the proving key")

    a_acc = g1_msm(pk.a_query, witness)
    a_point = g1_add(g1_add(pk.alpha_g1, a_acc), g1_mul(pk.delta_g1, r))

    b_g2_acc = g2_add(pk.beta_g2, g2_msm(pk.b_g2_query, witness))
    b_point = g2_add(b_g2_acc, g2_mul(pk.delta_g2, s))

    b_g1_acc = g1_add(pk.beta_g1, g1_msm(pk.b_g1_query, witness))
    b_g1_point = g1_add(b_g1_acc, g1_mul(pk.delta_g1, s))

    c_acc = g1_msm(pk.l_query, witness[pk.num_public :])
    c_acc = g1_add(c_acc, g1_msm(pk.h_query, h_coeffs))
    c_acc = g1_add(c_acc, g1_mul(a_point, s))
    c_acc = g1_add(c_acc, g1_mul(b_g1_point, r))
    c_point = g1_add(c_acc, g1_neg(g1_mul(pk.delta_g1, r * s % _R)))

    return Proof(a_point, b_point, c_point)


def verify(vk: VerificationKey, proof: Proof, public_inputs) -> bool:
    """Check the pairing equation for public inputs (excluding the 1)."""
    if len(public_inputs) != len(vk.ic) - 1:
        raise VerificationError(
            f"expected {len(vk.ic) - 1} public inputs, got {len(public_inputs)}"
        )
    for pt in (proof.a, proof.c):
        if pt is not None and not g1_is_on_curve(pt):
            raise VerificationError("proof contains a point off the curve")
    if proof.b is None or not (g2_is_on_curve(proof.b) and g2_in_subgroup(proof.b)):
        raise VerificationError("proof element B is not in the proper subgroup")

    prep = vk.prepared()
    scalars = [1] + [int(v) % _R for v in public_inputs]
    l_point = g1_msm(vk.ic, scalars)

    f = miller_product(
        [
            (g1_neg(proof.a), precompute_g2(proof.b)),
            (l_point, prep["gamma"]),
            (proof.c, prep["delta"]),
        ]
    )
    result = TargetElement(final_exponentiation(f)) * prep["e_alpha_beta"]
    return result.is_one()


# -- wire format --------------------------------------------------------------


def encode_envelope(proof: Proof, public_inputs, circuit_digest: bytes) -> bytes:
    """Self-describing proof envelope: header, publics, 128-byte proof."""
    if len(circuit_digest) != 32:
        raise VerificationError("circuit digest must be 32 bytes")
    publics = [int(v) % _R for v in public_inputs]
    parts = [
        ENVELOPE_MAGIC,
        struct.pack("<B", ENVELOPE_VERSION),
        circuit_digest,
        struct.pack("<H", len(publics)),
    ]
    parts.extend(v.to_bytes(32, "little") for v in publics)
    parts.append(proof.to_bytes())
    return b"".join(parts)


def decode_envelope(blob: bytes):
    """Returns (circuit_digest, public_inputs, proof); structural checks only."""
    if len(blob) < 4 + 1 + 32 + 2 + PROOF_SIZE:
        raise VerificationError("envelope too short")
    if blob[:4] != ENVELOPE_MAGIC:
        raise VerificationError("bad envelope magic")
    if blob[4] != ENVELOPE_VERSION:
        raise VerificationError(f"unsupported envelope version {blob[4]}")
    digest = blob[5:37]
    (count,) = struct.unpack_from("<H", blob, 37)
    expected = 39 + 32 * count + PROOF_SIZE
    if len(blob) != expected:
        raise VerificationError("envelope length does not match its public-input count")
    publics = []
    off = 39
    for _ in range(count):
        value = int.from_bytes(blob[off : off + 32], "little")
        if value >= _R:
            raise VerificationError("public input exceeds the field modulus")
        publics.append(value)
        off += 32
    try:
        proof = Proof.from_bytes(blob[off : off + PROOF_SIZE])
    except GroupError as exc:
        raise VerificationError(f"malformed proof point: {exc}") from exc
    return digest, publics, proof


def verify_envelope(vk: VerificationKey, blob: bytes) -> bool:
    """Full wire-side verification, including circuit-digest binding."""
    digest, publics, proof = decode_envelope(blob)
    if digest != vk.circuit_digest:
        raise VerificationError("circuit digest mismatch between envelope and key")
    return verify(vk, proof, publics)
