"""Operator surface for the enrollment and authentication pipeline.

Subcommands:

  setup        build and cache proving/verification keys for a score shape
  enroll       minutiae -> keyed template -> content store -> ledger binding
  authenticate score a probe against a stored template and prove the result
  prove        prove a threshold statement over a fixed-point score file
  verify       check a proof envelope against a verification key
  verify-chain audit the ledger hash chain
  bench        report proof size and prove/verify timings

Exit codes: 0 success (a "rejected" authentication is a successful run),
2 unreadable input, 3 unusable biometric data, 4 storage or ledger
failure, 5 verification-layer failure (unknown key, invalid proof).
"""

import argparse
import hashlib
import json
import logging
import secrets
import struct
import sys
import time
from pathlib import Path

from .circuit import CircuitError, WitnessError, build_threshold_circuit
from .config import Config, ConfigError, apply_overrides, load_config
from .constraints import QAP
from .groth16 import (
    ProvingKey,
    VerificationError,
    VerificationKey,
    decode_envelope,
    encode_envelope,
    prove,
    setup,
    verify,
)
from .matching import (
    FixedPointLSM,
    IncompatibleTemplateError,
    MatchError,
    decide,
    gms,
    similarity,
    to_fixed_point,
)
from .minutiae import (
    ImageError,
    InsufficientDataError,
    MinutiaeParseError,
    image_to_minutiae,
    load_image,
    load_minutiae,
)
from .registry import Cid, Registry, StorageError, UnknownKeyError
from .template import (
    CancelableTemplate,
    GridConfig,
    TemplateError,
    TemplateParams,
    make_template,
)

log = logging.getLogger(__name__)

EXIT_PARSE = 2
EXIT_BIOMETRIC = 3
EXIT_STORAGE = 4
EXIT_VERIFY = 5

IMAGE_SUFFIXES = {".png", ".pgm"}


def _params(cfg: Config) -> TemplateParams:
    grid = GridConfig(cx=cfg.cx, cy=cfg.cy, d_max=cfg.d_max)
    return TemplateParams(k=cfg.k, grid=grid, p=cfg.p)


def _projection_key(user_key: bytes) -> bytes:
    return hashlib.shake_256(b"template-key-v1" + user_key).digest(32)


def _key_check(salt: bytes, user_key: bytes) -> bytes:
    return hashlib.sha256(b"key-check-v1" + salt + user_key).digest()[:16]


def _policy_digest(params_digest: bytes, threshold: int, bit_width: int) -> bytes:
    tail = struct.pack("<BB", threshold, bit_width)
    return hashlib.sha256(b"auth-policy-v1" + params_digest + tail).digest()


def _registry(cfg: Config) -> Registry:
    return Registry(cfg.store_path, cfg.ledger_path)


def _keys_dir(cfg: Config) -> Path:
    return Path(cfg.store_path).parent / "keys"


def _proofs_dir(cfg: Config) -> Path:
    return Path(cfg.store_path).parent / "proofs"


def _read_minutiae(path, cfg: Config) -> list:
    path = Path(path)
    if path.suffix.lower() in IMAGE_SUFFIXES:
        return image_to_minutiae(load_image(path), resize_400=cfg.resize_400)
    return load_minutiae(path)


def _load_or_build_keys(cfg: Config, circuit, contributors: int = 3, force: bool = False):
    """Cached per-circuit-digest key pair; a ceremony runs on first use."""
    digest = circuit.digest()
    keys_dir = _keys_dir(cfg)
    keys_dir.mkdir(parents=True, exist_ok=True)
    stem = keys_dir / digest.hex()[:16]
    pk_path = stem.with_suffix(".pk")
    vk_path = stem.with_suffix(".vk")
    if not force and pk_path.exists() and vk_path.exists():
        pk = ProvingKey.from_bytes(pk_path.read_bytes())
        vk = VerificationKey.from_bytes(vk_path.read_bytes())
        if pk.circuit_digest == digest and vk.circuit_digest == digest:
            log.debug("using cached keys %s", stem.name)
            return pk, vk, vk_path
        log.warning("cached keys %s do not match the circuit, rebuilding", stem.name)
    r1cs = circuit.to_r1cs()
    log.info(
        "running setup for circuit %s (%d constraints, %d wires)",
        digest.hex()[:16], r1cs.num_constraints, r1cs.num_vars,
    )
    started = time.perf_counter()
    pk, vk, transcript = setup(QAP(r1cs), digest, contributors=contributors)
    log.info("setup finished in %.1f s (transcript %s)",
             time.perf_counter() - started, transcript.final_hash.hex()[:16])
    pk_path.write_bytes(pk.to_bytes())
    vk_path.write_bytes(vk.to_bytes())
    return pk, vk, vk_path


def cmd_setup(args, cfg: Config) -> int:
    tc = build_threshold_circuit(args.rows, args.cols, bit_width=cfg.bit_width)
    pk, vk, vk_path = _load_or_build_keys(cfg, tc.circuit, contributors=args.contributors,
                                          force=args.force)
    print(f"circuit: {tc.circuit.digest().hex()}")
    print(f"shape: {args.rows}x{args.cols}, {len(tc.circuit.gates)} gates")
    print(f"proving key: {vk_path.with_suffix('.pk')} ({len(pk.to_bytes())} bytes)")
    print(f"verification key: {vk_path} ({len(vk.to_bytes())} bytes)")
    return 0


def cmd_enroll(args, cfg: Config) -> int:
    minutiae = _read_minutiae(args.input, cfg)
    if args.user_key is not None:
        user_key = bytes.fromhex(args.user_key)
        if len(user_key) != 16:
            raise MinutiaeParseError("user key must be 32 hex characters")
    else:
        user_key = secrets.token_bytes(16)
    params = _params(cfg)
    template = make_template(minutiae, _projection_key(user_key), params)

    registry = _registry(cfg)
    template_cid = registry.store.put(template.to_bytes())
    salt = secrets.token_bytes(16)
    credential = {
        "version": 1,
        "template": template_cid.hex,
        "salt": salt.hex(),
        "key_check": _key_check(salt, user_key).hex(),
        "params": template.params_digest.hex(),
        "threshold": cfg.threshold,
        "bit_width": cfg.bit_width,
    }
    credential_cid = registry.store.put(json.dumps(credential, sort_keys=True).encode())
    registry.register(
        credential_cid,
        _policy_digest(template.params_digest, cfg.threshold, cfg.bit_width),
        user_key=user_key,
    )
    print(f"user key: {user_key.hex()}")
    print(f"credential: {credential_cid.hex}")
    print(f"template: {template_cid.hex}")
    print(f"entries: {template.count}")
    return 0


def _load_credential(registry: Registry, user_key: bytes) -> dict:
    credential_cid, bound_policy = registry.lookup(user_key)
    credential = json.loads(registry.store.get(credential_cid))
    salt = bytes.fromhex(credential["salt"])
    if _key_check(salt, user_key) != bytes.fromhex(credential["key_check"]):
        raise UnknownKeyError(user_key.hex())
    policy = _policy_digest(
        bytes.fromhex(credential["params"]),
        int(credential["threshold"]),
        int(credential["bit_width"]),
    )
    if policy != bound_policy:
        raise VerificationError("credential does not match its ledger binding")
    return credential


def cmd_authenticate(args, cfg: Config) -> int:
    user_key = bytes.fromhex(args.user_key)
    if len(user_key) != 16:
        raise MinutiaeParseError("user key must be 32 hex characters")
    registry = _registry(cfg)
    credential = _load_credential(registry, user_key)
    enrolled = CancelableTemplate.from_bytes(
        registry.store.get(Cid.from_hex(credential["template"]))
    )
    threshold = int(credential["threshold"])
    bit_width = int(credential["bit_width"])

    minutiae = _read_minutiae(args.probe, cfg)
    query = make_template(minutiae, _projection_key(user_key), _params(cfg))
    scores = similarity(enrolled, query)
    decision = decide(scores, threshold / 100)
    fixed = to_fixed_point(scores)
    print(f"scores: {fixed.rows}x{fixed.cols}")
    print(f"threshold: {threshold}/100")
    print(f"gms: {gms(scores):.4f} (mean over matched entries)")

    tc = build_threshold_circuit(fixed.rows, fixed.cols, bit_width=bit_width)
    pk, vk, vk_path = _load_or_build_keys(cfg, tc.circuit)
    qap = QAP(tc.circuit.to_r1cs())
    try:
        witness = tc.witness(threshold, fixed.to_lists())
    except WitnessError:
        # mean over ALL entries fell below the cutoff: nothing to prove
        registry.record_auth(user_key, bytes(32), False)
        print("circuit statement: not satisfied")
        print("verdict: rejected")
        return 0

    started = time.perf_counter()
    proof = prove(pk, qap, witness)
    prove_ms = (time.perf_counter() - started) * 1000
    publics = tc.public_values(threshold, fixed.to_lists())
    started = time.perf_counter()
    ok = verify(vk, proof, publics)
    verify_ms = (time.perf_counter() - started) * 1000

    envelope = encode_envelope(proof, publics, tc.circuit.digest())
    proofs_dir = _proofs_dir(cfg)
    proofs_dir.mkdir(parents=True, exist_ok=True)
    proof_digest = hashlib.sha256(envelope).digest()
    proof_path = proofs_dir / f"{proof_digest.hex()[:16]}.zkp"
    proof_path.write_bytes(envelope)
    registry.record_auth(user_key, proof_digest, ok)

    print("circuit statement: satisfied")
    print(f"verdict: {'accepted' if ok else 'rejected'}")
    print(f"proof: {proof_path} ({len(envelope)} bytes)")
    print(f"verification key: {vk_path}")
    print(f"prove: {prove_ms:.1f} ms, verify: {verify_ms:.1f} ms")
    if decision.accepted != ok:
        # the two aggregation routes disagree near the cutoff; surface it
        log.warning(
            "matched-entry mean %.4f crosses the cutoff differently than the "
            "all-entry circuit statement", decision.gms,
        )
    return 0


def cmd_prove(args, cfg: Config) -> int:
    fixed = FixedPointLSM.from_text(Path(args.scores).read_text())
    threshold = cfg.threshold if args.threshold is None else args.threshold
    tc = build_threshold_circuit(fixed.rows, fixed.cols, bit_width=cfg.bit_width)
    pk, vk, vk_path = _load_or_build_keys(cfg, tc.circuit)
    try:
        witness = tc.witness(threshold, fixed.to_lists())
    except WitnessError:
        print("statement not satisfied; no proof produced")
        return EXIT_VERIFY
    proof = prove(pk, QAP(tc.circuit.to_r1cs()), witness)
    publics = tc.public_values(threshold, fixed.to_lists())
    envelope = encode_envelope(proof, publics, tc.circuit.digest())
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_bytes(envelope)
    print(f"proof: {out} ({len(envelope)} bytes)")
    print(f"verification key: {vk_path}")
    return 0


def cmd_verify(args, cfg: Config) -> int:
    vk = VerificationKey.from_bytes(Path(args.vk).read_bytes())
    envelope = Path(args.proof).read_bytes()
    try:
        digest, publics, proof = decode_envelope(envelope)
    except VerificationError as exc:
        print(f"malformed proof envelope: {exc}")
        return EXIT_PARSE
    if digest != vk.circuit_digest:
        print("invalid (envelope was produced for a different circuit)")
        return EXIT_VERIFY
    started = time.perf_counter()
    ok = verify(vk, proof, publics)
    elapsed_ms = (time.perf_counter() - started) * 1000
    print(f"threshold: {publics[0]}/100")
    print("valid" if ok else "invalid")
    print(f"verify: {elapsed_ms:.1f} ms")
    return 0 if ok else EXIT_VERIFY


def cmd_verify_chain(args, cfg: Config) -> int:
    registry = _registry(cfg)
    if registry.verify_chain():
        print(f"ledger chain: ok ({len(registry.ledger.records())} records)")
        return 0
    print("ledger chain: BROKEN")
    return EXIT_STORAGE


def cmd_bench(args, cfg: Config) -> int:
    if args.runs < 1:
        raise ConfigError("bench needs at least one run")
    tc = build_threshold_circuit(args.rows, args.cols, bit_width=cfg.bit_width)
    r1cs = tc.circuit.to_r1cs()
    qap = QAP(r1cs)
    started = time.perf_counter()
    pk, vk, _ = setup(qap, tc.circuit.digest())
    setup_s = time.perf_counter() - started

    matrix = [[100] * args.cols for _ in range(args.rows)]
    publics = tc.public_values(cfg.threshold, matrix)
    witness = tc.witness(cfg.threshold, matrix)

    prove_times, verify_times = [], []
    envelope = b""
    for _ in range(args.runs):
        started = time.perf_counter()
        proof = prove(pk, qap, witness)
        prove_times.append(time.perf_counter() - started)
        started = time.perf_counter()
        ok = verify(vk, proof, publics)
        verify_times.append(time.perf_counter() - started)
        if not ok:
            raise VerificationError("benchmark proof failed to verify")
        envelope = encode_envelope(proof, publics, tc.circuit.digest())

    stats = {
        "shape": f"{args.rows}x{args.cols}",
        "constraints": r1cs.num_constraints,
        "proof_bytes": len(proof.to_bytes()),
        "envelope_bytes": len(envelope),
        "setup_s": round(setup_s, 3),
        "prove_ms_mean": round(sum(prove_times) / len(prove_times) * 1000, 2),
        "verify_ms_mean": round(sum(verify_times) / len(verify_times) * 1000, 2),
        "runs": args.runs,
    }
    if args.json:
        print(json.dumps(stats))
    else:
        print(f"shape: {stats['shape']} ({stats['constraints']} constraints)")
        print(f"proof size: {stats['proof_bytes']} bytes")
        print(f"envelope size: {stats['envelope_bytes']} bytes")
        print(f"setup: {stats['setup_s']} s")
        print(f"prove: {stats['prove_ms_mean']} ms mean over {args.runs} runs")
        print(f"verify: {stats['verify_ms_mean']} ms mean over {args.runs} runs")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="zkfinger",
        description="Keyed fingerprint templates with provable threshold matching.",
    )
    parser.add_argument("-c", "--config", help="configuration file (key = value lines)")
    parser.add_argument("--store", help="content store directory")
    parser.add_argument("--ledger", help="ledger file path")
    parser.add_argument("--threshold", type=int, help="acceptance cutoff in percent")
    parser.add_argument("-v", "--verbose", action="count", default=0,
                        help="-v for progress, -vv for debug")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("setup", help="build and cache keys for a score shape")
    p.add_argument("--rows", type=int, default=1)
    p.add_argument("--cols", type=int, default=1)
    p.add_argument("--contributors", type=int, default=3)
    p.add_argument("--force", action="store_true", help="rebuild even if cached")
    p.set_defaults(func=cmd_setup)

    p = sub.add_parser("enroll", help="register a fingerprint into the store")
    p.add_argument("input", help="minutiae text file or grayscale image")
    p.add_argument("--user-key", help="reuse a 32-hex-char key instead of generating one")
    p.set_defaults(func=cmd_enroll)

    p = sub.add_parser("authenticate", help="match a probe and prove the outcome")
    p.add_argument("user_key", help="32-hex-char key printed at enrollment")
    p.add_argument("probe", help="probe minutiae text file or grayscale image")
    p.set_defaults(func=cmd_authenticate)

    p = sub.add_parser("prove", help="prove a threshold statement over a score file")
    p.add_argument("scores", help="fixed-point score matrix (text)")
    p.add_argument("--out", default="proof.zkp")
    p.set_defaults(func=cmd_prove)

    p = sub.add_parser("verify", help="check a proof envelope")
    p.add_argument("proof", help="proof envelope file")
    p.add_argument("vk", help="verification key file")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("verify-chain", help="audit the ledger hash chain")
    p.set_defaults(func=cmd_verify_chain)

    p = sub.add_parser("bench", help="time setup/prove/verify for a score shape")
    p.add_argument("--rows", type=int, default=1)
    p.add_argument("--cols", type=int, default=1)
    p.add_argument("--runs", type=int, default=10)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_bench)
    return parser


def _configure(args) -> Config:
    cfg = load_config(args.config) if args.config else Config()
    return apply_overrides(
        cfg,
        store_path=args.store,
        ledger_path=args.ledger,
        threshold=args.threshold,
    )


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = _configure(args)
        return args.func(args, cfg)
    except (InsufficientDataError, MatchError) as exc:
        log.error("%s", exc)
        return EXIT_BIOMETRIC
    except (ConfigError, MinutiaeParseError, ImageError, TemplateError,
            CircuitError, ValueError, struct.error) as exc:
        log.error("%s", exc)
        return EXIT_PARSE
    except FileNotFoundError as exc:
        log.error("%s", exc)
        return EXIT_PARSE
    except UnknownKeyError as exc:
        log.error("unknown user key %s", exc)
        return EXIT_VERIFY
    except StorageError as exc:
        log.error("%s", exc)
        return EXIT_STORAGE
    except VerificationError as exc:
        log.error("%s", exc)
        return EXIT_VERIFY


if __name__ == "__main__":
    sys.exit(main())
