"""Content-addressed object store and tamper-evident registration ledger.

Objects live as one file per content digest; identifiers carry a
two-byte multihash-style prefix (hash code, digest length) ahead of the
SHA-256 digest, and every read re-hashes the bytes before returning
them. The ledger is a single append-only file of length-prefixed
records, each carrying the hash of its predecessor, so any byte-level
edit breaks the chain from that point on.

Appends serialize through an in-process lock plus an advisory file lock
so concurrent writers (threads or processes) produce gap-free indices.
"""

import hashlib
import os
import secrets
import struct
import threading
import time
from dataclasses import dataclass
from pathlib import Path

try:
    import fcntl
except ImportError:  # non-POSIX fallback; the in-process lock still applies
    fcntl = None

CID_HASH_CODE = 0x12  # sha2-256
CID_LENGTH = 0x20

KIND_REGISTER = 1
KIND_AUTH = 2

_GENESIS = bytes(32)


class StorageError(OSError):
    pass


class NotFoundError(StorageError):
    pass


class CorruptionError(StorageError):
    pass


class UnknownKeyError(KeyError):
    pass


@dataclass(frozen=True)
class Cid:
    digest: bytes
    code: int = CID_HASH_CODE

    def __post_init__(self):
        if len(self.digest) != 32:
            raise ValueError("cid digest must be 32 bytes")

    def encode(self) -> bytes:
        return bytes((self.code, CID_LENGTH)) + self.digest

    @property
    def hex(self) -> str:
        return self.encode().hex()

    @classmethod
    def from_content(cls, content: bytes) -> "Cid":
        return cls(hashlib.sha256(content).digest())

    @classmethod
    def from_hex(cls, text: str) -> "Cid":
        raw = bytes.fromhex(text)
        if len(raw) != 34 or raw[1] != CID_LENGTH:
            raise ValueError("malformed cid")
        return cls(raw[2:], raw[0])


@dataclass(frozen=True)
class LedgerRecord:
    index: int
    kind: int
    prev_hash: bytes
    body: bytes

    def payload(self) -> bytes:
        return struct.pack("<QB", self.index, self.kind) + self.prev_hash + self.body

    def record_hash(self) -> bytes:
        return hashlib.sha256(self.payload()).digest()


def _register_body(user_key: bytes, cid: Cid, vk_digest: bytes) -> bytes:
    return user_key + cid.encode() + vk_digest


def _parse_register_body(body: bytes):
    if len(body) != 16 + 34 + 32:
        raise CorruptionError("register record has the wrong size")
    cid_raw = body[16:50]
    return body[:16], Cid(cid_raw[2:], cid_raw[0]), body[50:]


def _auth_body(user_key: bytes, proof_digest: bytes, verdict: bool, timestamp: int) -> bytes:
    return user_key + proof_digest + struct.pack("<BQ", int(verdict), timestamp)


class ContentStore:
    """One file per object, named by hex digest, written atomically."""

    def __init__(self, root):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)

    def _path(self, cid: Cid) -> Path:
        return self.root / cid.digest.hex()

    def put(self, content: bytes) -> Cid:
        if not content:
            raise StorageError("refusing to store empty content")
        cid = Cid.from_content(content)
        path = self._path(cid)
        if not path.exists():
            tmp = path.with_suffix(f".tmp-{os.getpid()}-{secrets.token_hex(4)}")
            try:
                tmp.write_bytes(content)
                os.replace(tmp, path)
            except OSError as exc:
                tmp.unlink(missing_ok=True)
                raise StorageError(f"cannot store object: {exc}") from exc
        return cid

    def get(self, cid: Cid) -> bytes:
        path = self._path(cid)
        try:
            content = path.read_bytes()
        except FileNotFoundError:
            raise NotFoundError(f"no object for cid {cid.hex}") from None
        except OSError as exc:
            raise StorageError(f"cannot read object: {exc}") from exc
        if hashlib.sha256(content).digest() != cid.digest:
            raise CorruptionError(f"stored object does not match cid {cid.hex}")
        return content

    def contains(self, cid: Cid) -> bool:
        return self._path(cid).exists()


class Ledger:
    """Append-only hash chain; readers replay the file from the top.

    The record file alone cannot attest to its own tail (nothing chains
    after the last record), so each append also rewrites a small head
    file holding the record count and the hash of the last record.
    verify_chain checks both, which makes any single-byte edit of either
    file detectable.
    """

    def __init__(self, path):
        self.path = Path(path)
        self.head_path = Path(str(path) + ".head")
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()

    def append(self, kind: int, body: bytes) -> LedgerRecord:
        with self._lock:
            with open(self.path, "ab") as handle:
                if fcntl is not None:
                    fcntl.flock(handle.fileno(), fcntl.LOCK_EX)
                try:
                    records = self.records()
                    prev = records[-1].record_hash() if records else _GENESIS
                    record = LedgerRecord(len(records), kind, prev, body)
                    payload = record.payload()
                    handle.write(struct.pack("<I", len(payload)) + payload)
                    handle.flush()
                    os.fsync(handle.fileno())
                    self._write_head(len(records) + 1, record.record_hash())
                finally:
                    if fcntl is not None:
                        fcntl.flock(handle.fileno(), fcntl.LOCK_UN)
        return record

    def _write_head(self, count: int, head_hash: bytes):
        tmp = self.head_path.with_suffix(f".tmp-{os.getpid()}")
        tmp.write_bytes(struct.pack("<Q", count) + head_hash)
        os.replace(tmp, self.head_path)

    def _read_head(self):
        try:
            data = self.head_path.read_bytes()
        except FileNotFoundError:
            return None
        if len(data) != 40:
            raise CorruptionError("malformed ledger head")
        return struct.unpack_from("<Q", data)[0], data[8:]

    def records(self) -> list:
        if not self.path.exists():
            return []
        data = self.path.read_bytes()
        records = []
        offset = 0
        while offset < len(data):
            if offset + 4 > len(data):
                raise CorruptionError("truncated ledger length prefix")
            (length,) = struct.unpack_from("<I", data, offset)
            offset += 4
            if offset + length > len(data) or length < 41:
                raise CorruptionError("truncated ledger record")
            payload = data[offset : offset + length]
            offset += length
            index, kind = struct.unpack_from("<QB", payload)
            records.append(LedgerRecord(index, kind, payload[9:41], payload[41:]))
        return records

    def verify_chain(self) -> bool:
        try:
            records = self.records()
            head = self._read_head()
        except CorruptionError:
            return False
        prev = _GENESIS
        for i, record in enumerate(records):
            if record.index != i or record.prev_hash != prev:
                return False
            if record.kind not in (KIND_REGISTER, KIND_AUTH):
                return False
            prev = record.record_hash()
        if head is None:
            return not records
        return head == (len(records), prev)


class Registry:
    """Store plus ledger with the user-key index kept in memory."""

    def __init__(self, store_root, ledger_path):
        self.store = ContentStore(store_root)
        self.ledger = Ledger(ledger_path)

    def _registrations(self) -> dict:
        table = {}
        for record in self.ledger.records():
            if record.kind == KIND_REGISTER:
                user_key, cid, vk_digest = _parse_register_body(record.body)
                table[user_key] = (cid, vk_digest)
        return table

    def register(self, cid: Cid, vk_digest: bytes, user_key: bytes = None) -> bytes:
        """Bind a stored object to a (new or caller-held) 128-bit key."""
        if not self.store.contains(cid):
            raise NotFoundError(f"cid {cid.hex} is not in the store")
        if len(vk_digest) != 32:
            raise ValueError("vk digest must be 32 bytes")
        existing = self._registrations()
        if user_key is None:
            user_key = secrets.token_bytes(16)
            while user_key in existing:
                user_key = secrets.token_bytes(16)
        else:
            if len(user_key) != 16:
                raise ValueError("user key must be 16 bytes")
            if user_key in existing:
                raise ValueError("user key already registered")
        self.ledger.append(KIND_REGISTER, _register_body(user_key, cid, vk_digest))
        return user_key

    def lookup(self, user_key: bytes):
        """(cid, vk_digest) for a registered key."""
        try:
            return self._registrations()[user_key]
        except KeyError:
            raise UnknownKeyError(user_key.hex()) from None

    def record_auth(self, user_key: bytes, proof_digest: bytes, verdict: bool,
                    timestamp: int = None) -> LedgerRecord:
        if user_key not in self._registrations():
            raise UnknownKeyError(user_key.hex())
        if len(proof_digest) != 32:
            raise ValueError("proof digest must be 32 bytes")
        if timestamp is None:
            timestamp = int(time.time())
        return self.ledger.append(KIND_AUTH, _auth_body(user_key, proof_digest, verdict, timestamp))

    def verify_chain(self) -> bool:
        return self.ledger.verify_chain()
