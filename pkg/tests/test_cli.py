"""End-to-end command-line flows and the exit-code contract."""

import io
import json
import re
import subprocess
import sys
from contextlib import redirect_stdout

import pytest

from zkfinger.cli import main

GENUINE = """\
# three-point fixture
100.0 100.0 0.50 E
140.0 110.0 2.10 B
120.0 150.0 4.00 E
"""

IMPOSTOR = """\
200.0 80.0 1.00 B
210.0 170.0 5.50 E
290.0 120.0 3.30 E
"""

USER_KEY = "000102030405060708090a0b0c0d0e0f"


def run(workdir, *args, threshold=None):
    argv = ["--store", str(workdir / "art" / "objects"),
            "--ledger", str(workdir / "art" / "ledger.bin")]
    if threshold is not None:
        argv += ["--threshold", str(threshold)]
    buffer = io.StringIO()
    with redirect_stdout(buffer):
        code = main(argv + list(args))
    return code, buffer.getvalue()


@pytest.fixture(scope="module")
def workdir(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli")
    (root / "genuine.txt").write_text(GENUINE)
    (root / "impostor.txt").write_text(IMPOSTOR)
    return root


@pytest.fixture(scope="module")
def enrolled(workdir):
    code, out = run(workdir, "enroll", str(workdir / "genuine.txt"),
                    "--user-key", USER_KEY, threshold=40)
    assert code == 0
    return out


@pytest.fixture(scope="module")
def genuine_auth(workdir, enrolled):
    """One accepted authentication; returns (output, proof path, vk path)."""
    code, out = run(workdir, "authenticate", USER_KEY, str(workdir / "genuine.txt"))
    assert code == 0
    proof = re.search(r"proof: (\S+\.zkp)", out).group(1)
    vk = re.search(r"verification key: (\S+\.vk)", out).group(1)
    return out, proof, vk


class TestEnroll:
    def test_prints_key_cid_entries(self, enrolled):
        assert f"user key: {USER_KEY}" in enrolled
        assert re.search(r"credential: [0-9a-f]{68}", enrolled)
        assert re.search(r"template: [0-9a-f]{68}", enrolled)
        assert "entries: 3" in enrolled

    def test_same_key_same_template_cid(self, workdir, enrolled):
        code, out = run(workdir, "--store", str(workdir / "alt" / "objects"),
                        "--ledger", str(workdir / "alt" / "ledger.bin"),
                        "enroll", str(workdir / "genuine.txt"), "--user-key", USER_KEY)
        assert code == 0
        original = re.search(r"template: ([0-9a-f]{68})", enrolled).group(1)
        assert f"template: {original}" in out

    def test_fresh_key_fresh_template_cid(self, workdir, enrolled):
        code, out = run(workdir, "enroll", str(workdir / "genuine.txt"))
        assert code == 0
        original = re.search(r"template: ([0-9a-f]{68})", enrolled).group(1)
        assert f"template: {original}" not in out

    def test_empty_input_is_biometric_failure(self, workdir):
        empty = workdir / "empty.txt"
        empty.write_text("")
        code, _ = run(workdir, "enroll", str(empty))
        assert code == 3

    def test_malformed_input_is_parse_failure(self, workdir):
        bad = workdir / "bad.txt"
        bad.write_text("10.0 x 0.5 E\n")
        code, _ = run(workdir, "enroll", str(bad))
        assert code == 2

    def test_missing_file(self, workdir):
        code, _ = run(workdir, "enroll", str(workdir / "nope.txt"))
        assert code == 2


class TestAuthenticate:
    def test_genuine_accepted(self, genuine_auth):
        out, proof, _ = genuine_auth
        assert "verdict: accepted" in out
        assert "circuit statement: satisfied" in out
        assert "threshold: 40/100" in out
        assert re.search(r"prove: [\d.]+ ms, verify: [\d.]+ ms", out)

    def test_impostor_rejected(self, workdir, enrolled):
        code, out = run(workdir, "authenticate", USER_KEY, str(workdir / "impostor.txt"))
        assert code == 0
        assert "verdict: rejected" in out
        assert "circuit statement: not satisfied" in out

    def test_unknown_key(self, workdir, enrolled):
        code, _ = run(workdir, "authenticate", "ff" * 16, str(workdir / "genuine.txt"))
        assert code == 5

    def test_bad_key_format(self, workdir, enrolled):
        code, _ = run(workdir, "authenticate", "zz", str(workdir / "genuine.txt"))
        assert code == 2


class TestVerify:
    def test_fresh_proof_valid(self, genuine_auth):
        _, proof, vk = genuine_auth
        buffer = io.StringIO()
        with redirect_stdout(buffer):
            code = main(["verify", proof, vk])
        out = buffer.getvalue()
        assert code == 0
        assert "valid" in out.splitlines()
        assert re.search(r"verify: [\d.]+ ms", out)

    def test_tampered_proof_invalid(self, workdir, genuine_auth):
        _, proof, vk = genuine_auth
        blob = bytearray(open(proof, "rb").read())
        blob[45] ^= 1  # inside a public input
        tampered = workdir / "tampered.zkp"
        tampered.write_bytes(bytes(blob))
        assert main(["verify", str(tampered), vk]) == 5

    def test_truncated_envelope_is_parse_failure(self, workdir, genuine_auth):
        _, proof, vk = genuine_auth
        short = workdir / "short.zkp"
        short.write_bytes(open(proof, "rb").read()[:50])
        assert main(["verify", str(short), vk]) == 2

    def test_wrong_shape_vk_rejected(self, workdir, genuine_auth):
        _, proof, _ = genuine_auth
        scores = workdir / "scores_shape.txt"
        scores.write_text("1 2\n80 90\n")
        code, out = run(workdir, "prove", str(scores), "--out",
                        str(workdir / "shape.zkp"))
        assert code == 0
        other_vk = re.search(r"verification key: (\S+\.vk)", out).group(1)
        assert main(["verify", proof, other_vk]) == 5


class TestProve:
    def test_statement_below_threshold(self, workdir):
        low = workdir / "low.txt"
        low.write_text("1 1\n10\n")
        code, out = run(workdir, "prove", str(low), "--out", str(workdir / "low.zkp"))
        assert code == 5
        assert "not satisfied" in out

    def test_prove_then_verify(self, workdir):
        scores = workdir / "scores2.txt"
        scores.write_text("1 2\n80 90\n")
        out_path = workdir / "scores2.zkp"
        code, out = run(workdir, "prove", str(scores), "--out", str(out_path))
        assert code == 0
        vk = re.search(r"verification key: (\S+\.vk)", out).group(1)
        assert main(["verify", str(out_path), vk]) == 0


class TestChain:
    def test_ok_then_broken(self, workdir, enrolled):
        code, out = run(workdir, "verify-chain")
        assert code == 0
        assert "ledger chain: ok" in out
        ledger = workdir / "art" / "ledger.bin"
        blob = bytearray(ledger.read_bytes())
        blob[50] ^= 1
        ledger.write_bytes(bytes(blob))
        try:
            code, out = run(workdir, "verify-chain")
            assert code == 4
            assert "BROKEN" in out
        finally:
            blob[50] ^= 1
            ledger.write_bytes(bytes(blob))
        code, _ = run(workdir, "verify-chain")
        assert code == 0


class TestBench:
    def test_json_stats(self, workdir):
        code, out = run(workdir, "bench", "--runs", "2", "--json")
        assert code == 0
        stats = json.loads(out)
        assert stats["proof_bytes"] == 128
        assert stats["envelope_bytes"] <= 256
        assert stats["runs"] == 2


class TestArtifactHygiene:
    def test_no_raw_minutiae_on_disk(self, workdir, genuine_auth):
        needles = [line.split()[0].encode() for line in GENUINE.splitlines()
                   if line and not line.startswith("#")]
        needles.append(b"100.0 100.0")
        for path in (workdir / "art").rglob("*"):
            if not path.is_file():
                continue
            blob = path.read_bytes()
            for needle in needles:
                assert needle not in blob, f"{needle!r} leaked into {path.name}"


class TestSetupCommand:
    def test_builds_and_caches(self, workdir):
        code, out = run(workdir, "setup", "--rows", "1", "--cols", "1")
        assert code == 0
        digest = re.search(r"circuit: ([0-9a-f]{64})", out).group(1)
        code, out = run(workdir, "setup", "--rows", "1", "--cols", "1")
        assert code == 0
        assert digest in out


class TestConsoleEntry:
    def test_module_invocation(self, workdir, enrolled):
        result = subprocess.run(
            [sys.executable, "-m", "zkfinger", "--store",
             str(workdir / "art" / "objects"), "--ledger",
             str(workdir / "art" / "ledger.bin"), "verify-chain"],
            capture_output=True, text=True, timeout=120,
        )
        assert result.returncode == 0
        assert "ledger chain: ok" in result.stdout
