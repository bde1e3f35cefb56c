"""The simulated permissionless registry: one pseudonym per person.

Registration runs entirely inside attested logic: the bundle arrives sealed
under an attestation session, is re-verified from scratch, and the unique
identifier is checked against a keyed-tag store whose key only the attested
logic holds. The host observes pseudonym digests, public keys and opaque
tags; it never sees a plaintext identifier. A second uniqueness layer, the
set accumulator over stable personal attributes, catches re-issued
documents whose identifier changed.

State mutates through a single-writer ordered log; the epoch of an entry is
its log position. Export is line-delimited JSON with exactly the fields
{op, pseudonym, pk, epoch}.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Callable, Iterable

from . import attestation
from .accumulator import Accumulator, accumulator_generate
from .codec import Decoder, Encoder
from .crypto import ByteStream, hash_parts, hmac_sha256
from .errors import (
    DecodeError,
    DuplicateIdentity,
    InvalidBundle,
    NoSession,
    ReplayedRegProof,
    UnknownPseudonym,
)
from .credential import (
    SUFFIX_OFF,
    SUFFIX_REG,
    Pseudonym,
    RegistrationBundle,
    verify_registration_bundle,
)
from .identity import CertChain, EPassport, TrustStore, extract_unique_id

REGISTRY_ENCLAVE = attestation.EnclaveIdentity(name="zkpoi-registry", version=1)

STATUS_ONLINE = "online"
STATUS_OFFLINE = "offline"


@dataclass
class RegistryEntry:
    pseudonym: Pseudonym  # REG form
    pk: bytes
    sign_pk: bytes | None
    status: str
    registered_at: int


class EncryptedIdDB:
    """Identifier store under a key held only by attested logic.

    Each identifier is kept as a keyed deterministic tag: equality is
    testable with the key, and the host-visible view is the bare tag set.
    """

    def __init__(self, db_key: bytes):
        self._db_key = db_key
        self._tags: set[bytes] = set()

    def tag(self, unique_id: str) -> bytes:
        return hmac_sha256(self._db_key, unique_id.encode("utf-8"))

    def contains(self, unique_id: str) -> bool:
        return self.tag(unique_id) in self._tags

    def add(self, unique_id: str) -> None:
        self._tags.add(self.tag(unique_id))

    def remove(self, unique_id: str) -> None:
        self._tags.discard(self.tag(unique_id))

    def host_view(self) -> frozenset[bytes]:
        return frozenset(self._tags)

    def __len__(self) -> int:
        return len(self._tags)


def default_identity_attributes(doc) -> tuple[str, ...]:
    """Stable personal attributes that survive document renewal.

    Configurable per deployment; the default pins the holder's name plus
    birth date for passports and the subject name for certificates.
    """
    if isinstance(doc, EPassport):
        return ("epassport", doc.dg1.name, doc.dg1.birth_date, doc.dg1.nationality)
    if isinstance(doc, CertChain):
        return ("card", doc.leaf.issuer_name, doc.leaf.subject_name)
    raise TypeError(f"no attribute rule for {type(doc).__name__}")


def encode_attributes(attributes: tuple[str, ...]) -> bytes:
    enc = Encoder("attrs:v1").put_u64(len(attributes))
    for a in attributes:
        enc.put_text(a)
    return enc.done()


def decode_attributes(blob: bytes) -> tuple[str, ...]:
    d = Decoder(blob, "attrs:v1")
    out = tuple(d.take_text() for _ in range(d.take_u64()))
    d.finish()
    return out


class Registry:
    """Single-writer pseudonym ledger bound to one network identifier."""

    def __init__(self, trust_store: TrustStore, blockchain_id: str, *, seed: int,
                 allow_reregistration: bool = False,
                 attribute_extractor: Callable[[object], tuple[str, ...]] | None = None,
                 client_policy: attestation.AttestationPolicy | None = None):
        stream = ByteStream(hash_parts(b"registry-secrets", seed.to_bytes(8, "big"),
                                       blockchain_id.encode("utf-8")))
        self.trust_store = trust_store
        self.blockchain_id = blockchain_id
        self.allow_reregistration = allow_reregistration
        self.enclave = REGISTRY_ENCLAVE
        self._attributes_of = attribute_extractor or default_identity_attributes
        self._id_db = EncryptedIdDB(stream.take(32))
        self._session_rng = stream
        self.accumulator: Accumulator = accumulator_generate(seed)
        self.entries: dict[bytes, RegistryEntry] = {}  # digest -> entry
        self.log: list[dict] = []
        # Identifier needed again at take-offline time, kept enclave-side only.
        self._uid_by_digest: dict[bytes, str] = {}
        self._client_policy = client_policy

    # -- sessions -------------------------------------------------------------

    def open_session(self, client: attestation.EnclaveIdentity,
                     policy: attestation.AttestationPolicy | None = None,
                     ) -> attestation.AttestationSession:
        """Attest a client against this registry's enclave."""
        policy = policy or self._client_policy or attestation.AttestationPolicy.expecting(
            client, self.enclave)
        return attestation.mutual_attest(client, self.enclave, policy, rng=self._session_rng)

    def _require_session(self, session) -> attestation.AttestationSession:
        if session is None or not getattr(session, "policy_ok", False):
            raise NoSession("a valid attestation session is required")
        if session.server.measurement != self.enclave.measurement:
            raise NoSession("session was not attested against this registry")
        return session

    def _unseal_bundle(self, session, sealed_bundle: bytes) -> RegistrationBundle:
        try:
            return RegistrationBundle.from_bytes(attestation.unseal(session, sealed_bundle))
        except DecodeError as exc:
            raise InvalidBundle(f"bundle does not decode: {exc}") from exc

    # -- core operations --------------------------------------------------------

    @property
    def epoch(self) -> int:
        return len(self.log)

    def _append(self, op: str, pseudonym: Pseudonym, pk: bytes) -> int:
        at = self.epoch
        self.log.append({"op": op, "pseudonym": pseudonym.label(), "pk": pk.hex(),
                         "epoch": at})
        return at

    def register(self, sealed_bundle: bytes, session, now: int) -> RegistryEntry:
        """Admit a new pseudonym: verify the sealed bundle, enforce identifier
        and attribute uniqueness, then append the entry."""
        session = self._require_session(session)
        bundle = self._unseal_bundle(session, sealed_bundle)
        if bundle.pseudonym.suffix != SUFFIX_REG:
            raise InvalidBundle("registration requires a REG-suffix pseudonym")
        verdict = verify_registration_bundle(bundle, self.trust_store, self.blockchain_id,
                                             now, expected_suffix=SUFFIX_REG)
        if not verdict.accepted:
            raise InvalidBundle(f"bundle rejected at {verdict.code}: {verdict.reason}")
        doc = bundle.evidence.decode_document()
        unique_id = extract_unique_id(doc)
        if self._id_db.contains(unique_id):
            raise DuplicateIdentity("identifier already registered")
        existing = self.entries.get(bundle.pseudonym.digest)
        if existing is not None and not (self.allow_reregistration
                                         and existing.status == STATUS_OFFLINE):
            raise DuplicateIdentity("pseudonym already registered")
        attributes = self._attributes_of(doc)
        if not self.accumulator.admit(encode_attributes(attributes)):
            raise DuplicateIdentity("personal attributes already registered")
        self._id_db.add(unique_id)
        entry = RegistryEntry(pseudonym=bundle.pseudonym, pk=bundle.pk,
                              sign_pk=bundle.sign_pk, status=STATUS_ONLINE,
                              registered_at=self.epoch)
        self.entries[bundle.pseudonym.digest] = entry
        self._uid_by_digest[bundle.pseudonym.digest] = unique_id
        self._append("register", bundle.pseudonym, bundle.pk)
        return entry

    def take_offline(self, sealed_off_bundle: bytes, session, now: int) -> RegistryEntry:
        """Retire a pseudonym on presentation of its OFF-suffix bundle.

        A replayed REG-suffix bundle is rejected outright; whether the
        identity may later re-register is the re-registration policy flag.
        """
        session = self._require_session(session)
        bundle = self._unseal_bundle(session, sealed_off_bundle)
        if bundle.pseudonym.suffix == SUFFIX_REG:
            raise ReplayedRegProof("a registration proof cannot retire a pseudonym")
        verdict = verify_registration_bundle(bundle, self.trust_store, self.blockchain_id,
                                             now, expected_suffix=SUFFIX_OFF)
        if not verdict.accepted:
            raise InvalidBundle(f"bundle rejected at {verdict.code}: {verdict.reason}")
        entry = self.entries.get(bundle.pseudonym.digest)
        if entry is None or entry.status != STATUS_ONLINE:
            raise UnknownPseudonym("no online entry for this pseudonym")
        if entry.pk != bundle.pk:
            raise InvalidBundle("removal key does not match the registered key")
        entry.status = STATUS_OFFLINE
        self._append("offline", bundle.pseudonym, bundle.pk)
        if self.allow_reregistration:
            doc = bundle.evidence.decode_document()
            unique_id = self._uid_by_digest.get(bundle.pseudonym.digest)
            if unique_id is not None:
                self._id_db.remove(unique_id)
            leaf = encode_attributes(self._attributes_of(doc))
            if self.accumulator.contains(leaf):
                from .accumulator import accumulator_remove
                accumulator_remove(self.accumulator, leaf)
        return entry

    def check_new_identity_against_accumulator(self, session, sealed_attributes: bytes) -> bool:
        """Admissibility of a sealed attribute tuple: absent means admissible,
        and admission accumulates it on the spot."""
        session = self._require_session(session)
        try:
            attributes = decode_attributes(attestation.unseal(session, sealed_attributes))
        except DecodeError as exc:
            raise InvalidBundle(f"attributes do not decode: {exc}") from exc
        return self.accumulator.admit(encode_attributes(attributes))

    # -- host-side views ---------------------------------------------------------

    def online_count(self) -> int:
        return sum(1 for e in self.entries.values() if e.status == STATUS_ONLINE)

    def host_view(self) -> dict:
        """Everything the untrusted host can observe."""
        return {
            "log": [dict(rec) for rec in self.log],
            "id_tags": sorted(t.hex() for t in self._id_db.host_view()),
            "accumulator_root": self.accumulator.root.hex(),
            "entries": {
                d.hex(): {"pk": e.pk.hex(), "status": e.status}
                for d, e in self.entries.items()
            },
        }

    def export_log(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            for rec in self.log:
                fh.write(json.dumps(rec, sort_keys=True) + "\n")


def load_log(path) -> list[dict]:
    records = []
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh):
            if not line.strip():
                continue
            rec = json.loads(line)
            missing = {"op", "pseudonym", "pk", "epoch"} - rec.keys()
            if missing:
                raise DecodeError(f"log line {line_no} lacks fields {sorted(missing)}")
            records.append(rec)
    return records


@dataclass
class RegistryView:
    """Public reconstruction of registry state from an exported log.

    Holds no secrets, so it can only answer status questions.
    """

    entries: dict[str, dict]
    epoch: int

    @classmethod
    def from_log(cls, records: Iterable[dict]) -> "RegistryView":
        entries: dict[str, dict] = {}
        epoch = 0
        for rec in records:
            label = rec["pseudonym"]
            digest_hex = label.split(":")[0]
            if rec["op"] == "register":
                entries[digest_hex] = {"pk": rec["pk"], "status": STATUS_ONLINE,
                                       "registered_at": rec["epoch"]}
            elif rec["op"] == "offline" and digest_hex in entries:
                entries[digest_hex]["status"] = STATUS_OFFLINE
            epoch = max(epoch, rec["epoch"] + 1)
        return cls(entries=entries, epoch=epoch)
