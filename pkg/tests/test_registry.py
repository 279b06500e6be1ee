"""Content store digests, ledger hash chain, registration bindings."""

import hashlib
import threading

import pytest

from zkfinger.registry import (
    Cid,
    ContentStore,
    CorruptionError,
    KIND_AUTH,
    KIND_REGISTER,
    Ledger,
    NotFoundError,
    Registry,
    StorageError,
    UnknownKeyError,
)


@pytest.fixture
def registry(tmp_path):
    return Registry(tmp_path / "objects", tmp_path / "ledger.bin")


class TestCid:
    def test_from_content(self):
        cid = Cid.from_content(b"payload")
        assert cid.digest == hashlib.sha256(b"payload").digest()
        assert cid.encode()[:2] == bytes((0x12, 0x20))

    def test_hex_roundtrip(self):
        cid = Cid.from_content(b"payload")
        assert Cid.from_hex(cid.hex) == cid

    def test_malformed_hex(self):
        with pytest.raises(ValueError):
            Cid.from_hex("1220abcd")

    def test_digest_length_checked(self):
        with pytest.raises(ValueError):
            Cid(b"short")


class TestContentStore:
    def test_put_get(self, tmp_path):
        store = ContentStore(tmp_path / "objects")
        cid = store.put(b"hello")
        assert store.get(cid) == b"hello"
        assert store.contains(cid)

    def test_put_is_idempotent(self, tmp_path):
        store = ContentStore(tmp_path / "objects")
        assert store.put(b"x") == store.put(b"x")

    def test_missing_object(self, tmp_path):
        store = ContentStore(tmp_path / "objects")
        with pytest.raises(NotFoundError):
            store.get(Cid.from_content(b"never stored"))

    def test_empty_content_rejected(self, tmp_path):
        with pytest.raises(StorageError):
            ContentStore(tmp_path / "objects").put(b"")

    def test_corruption_detected_on_read(self, tmp_path):
        store = ContentStore(tmp_path / "objects")
        cid = store.put(b"hello")
        path = store.root / cid.digest.hex()
        data = bytearray(path.read_bytes())
        data[0] ^= 0xFF
        path.write_bytes(bytes(data))
        with pytest.raises(CorruptionError):
            store.get(cid)


class TestLedger:
    def test_chain_empty(self, tmp_path):
        assert Ledger(tmp_path / "ledger.bin").verify_chain()

    def test_append_and_replay(self, tmp_path):
        ledger = Ledger(tmp_path / "ledger.bin")
        ledger.append(KIND_AUTH, b"a" * 57)
        ledger.append(KIND_AUTH, b"b" * 57)
        records = ledger.records()
        assert [r.index for r in records] == [0, 1]
        assert records[1].prev_hash == records[0].record_hash()
        assert ledger.verify_chain()

    def test_every_byte_mutation_detected(self, tmp_path):
        ledger = Ledger(tmp_path / "ledger.bin")
        for i in range(3):
            ledger.append(KIND_AUTH, bytes([i]) * 57)
        for target in (ledger.path, ledger.head_path):
            original = target.read_bytes()
            for offset in range(len(original)):
                mutated = bytearray(original)
                mutated[offset] ^= 0x01
                target.write_bytes(bytes(mutated))
                assert not ledger.verify_chain(), f"{target.name}[{offset}]"
            target.write_bytes(original)
        assert ledger.verify_chain()

    def test_truncation_detected(self, tmp_path):
        ledger = Ledger(tmp_path / "ledger.bin")
        ledger.append(KIND_AUTH, b"a" * 57)
        ledger.append(KIND_AUTH, b"b" * 57)
        data = ledger.path.read_bytes()
        ledger.path.write_bytes(data[: len(data) // 2])
        assert not ledger.verify_chain()

    def test_missing_head_detected(self, tmp_path):
        ledger = Ledger(tmp_path / "ledger.bin")
        ledger.append(KIND_AUTH, b"a" * 57)
        ledger.head_path.unlink()
        assert not ledger.verify_chain()

    def test_concurrent_appends_stay_contiguous(self, tmp_path):
        ledger = Ledger(tmp_path / "ledger.bin")

        def worker(tag):
            for _ in range(25):
                ledger.append(KIND_AUTH, bytes([tag]) * 57)

        threads = [threading.Thread(target=worker, args=(t,)) for t in range(4)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        records = ledger.records()
        assert [r.index for r in records] == list(range(100))
        assert ledger.verify_chain()


class TestRegistry:
    VK = hashlib.sha256(b"policy").digest()

    def test_register_and_lookup(self, registry):
        cid = registry.store.put(b"credential")
        user_key = registry.register(cid, self.VK)
        assert len(user_key) == 16
        assert registry.lookup(user_key) == (cid, self.VK)

    def test_explicit_key(self, registry):
        cid = registry.store.put(b"credential")
        key = bytes(range(16))
        assert registry.register(cid, self.VK, user_key=key) == key

    def test_duplicate_key_rejected(self, registry):
        cid = registry.store.put(b"credential")
        key = registry.register(cid, self.VK)
        with pytest.raises(ValueError):
            registry.register(cid, self.VK, user_key=key)

    def test_unknown_cid_rejected(self, registry):
        with pytest.raises(NotFoundError):
            registry.register(Cid.from_content(b"missing"), self.VK)

    def test_unknown_key(self, registry):
        with pytest.raises(UnknownKeyError):
            registry.lookup(bytes(16))

    def test_record_auth_requires_registration(self, registry):
        with pytest.raises(UnknownKeyError):
            registry.record_auth(bytes(16), bytes(32), True)

    def test_auth_appends_to_chain(self, registry):
        cid = registry.store.put(b"credential")
        key = registry.register(cid, self.VK)
        record = registry.record_auth(key, bytes(32), False, timestamp=1700000000)
        assert record.index == 1
        assert record.kind == KIND_AUTH
        assert registry.verify_chain()

    def test_two_registrations_roundtrip(self, registry):
        cid_a = registry.store.put(b"a")
        cid_b = registry.store.put(b"b")
        key_a = registry.register(cid_a, self.VK)
        key_b = registry.register(cid_b, self.VK)
        assert key_a != key_b
        assert registry.lookup(key_a)[0] == cid_a
        assert registry.lookup(key_b)[0] == cid_b
