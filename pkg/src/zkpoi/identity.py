"""Synthetic PKI and travel-document issuance plus their validators.

Two document families are modeled:

* identity cards: an end-entity certificate chained through zero or more
  intermediate authorities to a self-signed trusted root, with the holder's
  signing key kept off the serialized form;
* electronic passports: a machine-readable data group (DG1) with standard
  7-3-1 check digits, an optional personal number (DG11), an optional
  chip-resident challenge-signing key (DG15), and a security object binding
  hashes of all populated groups under a document-signer certificate that a
  country root vouches for.

Validation never raises for a bad document; it returns a report whose
failure code names the first check that failed.
"""

from __future__ import annotations

import datetime as _dt
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Union

from .codec import Decoder, Encoder
from .crypto import SigningKey, hash_parts, verify_signature
from .errors import (
    DecodeError,
    MissingIdentifier,
    NoActiveAuthentication,
    UnknownAuthority,
)

# Fixed synthetic epoch all fixture windows hang off (2020-09-13T12:26:40Z).
GENESIS = 1_600_000_000
YEAR = 365 * 24 * 3600

_AA_CONTEXT = b"zkpoi/active-auth/v1"


class FailureCode(str, Enum):
    GRAMMAR_ERROR = "GrammarError"
    EXPIRED = "Expired"
    REVOKED = "Revoked"
    CHAIN_BROKEN = "ChainBroken"
    BAD_SIGNATURE = "BadSignature"
    NOT_TRUSTED = "NotTrusted"
    HASH_MISMATCH = "HashMismatch"


@dataclass(frozen=True)
class ValidationReport:
    verdict: str  # "accepted" | "rejected"
    failure_code: FailureCode | None
    checked_at: int

    @property
    def accepted(self) -> bool:
        return self.verdict == "accepted"

    @staticmethod
    def ok(now: int) -> "ValidationReport":
        return ValidationReport("accepted", None, now)

    @staticmethod
    def fail(code: FailureCode, now: int) -> "ValidationReport":
        return ValidationReport("rejected", code, now)


# ---------------------------------------------------------------------------
# Certificates
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Certificate:
    subject_name: str
    issuer_name: str
    serial: int
    not_before: int
    not_after: int
    subject_public_key: bytes
    unique_id_field: str | None
    is_ca: bool
    signature: bytes  # issuer signature over tbs_bytes()

    def tbs_bytes(self) -> bytes:
        """To-be-signed portion: every field except the signature."""
        return (
            Encoder("cert-tbs:v1")
            .put_text(self.subject_name)
            .put_text(self.issuer_name)
            .put_u64(self.serial)
            .put_u64(self.not_before)
            .put_u64(self.not_after)
            .put_bytes(self.subject_public_key)
            .put_opt_text(self.unique_id_field)
            .put_bool(self.is_ca)
            .done()
        )

    def to_bytes(self) -> bytes:
        return Encoder("cert:v1").put_bytes(self.tbs_bytes()).put_bytes(self.signature).done()

    @classmethod
    def from_bytes(cls, blob: bytes) -> "Certificate":
        outer = Decoder(blob, "cert:v1")
        tbs = outer.take_bytes()
        signature = outer.take_bytes()
        outer.finish()
        d = Decoder(tbs, "cert-tbs:v1")
        cert = cls(
            subject_name=d.take_text(),
            issuer_name=d.take_text(),
            serial=d.take_u64(),
            not_before=d.take_u64(),
            not_after=d.take_u64(),
            subject_public_key=d.take_bytes(),
            unique_id_field=d.take_opt_text(),
            is_ca=d.take_bool(),
            signature=signature,
        )
        d.finish()
        if cert.not_before >= cert.not_after:
            raise DecodeError("validity window is reversed or empty")
        return cert

    def fingerprint(self) -> bytes:
        return hash_parts(b"cert-fingerprint", self.to_bytes())


@dataclass(frozen=True)
class CertChain:
    """Leaf plus intermediates, leaf first; the root stays in the trust store."""

    leaf: Certificate
    intermediates: tuple[Certificate, ...]
    root_fingerprint: bytes

    def certs(self) -> tuple[Certificate, ...]:
        return (self.leaf, *self.intermediates)

    def to_bytes(self) -> bytes:
        enc = Encoder("chain:v1").put_u64(len(self.intermediates) + 1)
        for cert in self.certs():
            enc.put_bytes(cert.to_bytes())
        return enc.put_bytes(self.root_fingerprint).done()

    @classmethod
    def from_bytes(cls, blob: bytes) -> "CertChain":
        d = Decoder(blob, "chain:v1")
        count = d.take_u64()
        if count < 1:
            raise DecodeError("chain must hold at least a leaf")
        certs = [Certificate.from_bytes(d.take_bytes()) for _ in range(count)]
        root_fp = d.take_bytes()
        d.finish()
        return cls(leaf=certs[0], intermediates=tuple(certs[1:]), root_fingerprint=root_fp)


@dataclass(frozen=True)
class TrustStore:
    trusted_roots: dict[bytes, bytes]  # fingerprint -> root public key
    allowed_authorities: frozenset[str]
    root_names: dict[str, bytes]  # root subject name -> fingerprint

    def root_key(self, fingerprint: bytes) -> bytes | None:
        return self.trusted_roots.get(fingerprint)


class CertAuthority:
    """Issuing handle: a CA certificate plus its private key and serial counter."""

    def __init__(self, cert: Certificate, key: SigningKey,
                 chain_up: tuple[Certificate, ...], root_fingerprint: bytes,
                 seed_tag: bytes):
        self.cert = cert
        self._key = key
        # Intermediates between an issued leaf and the root, leaf-adjacent first.
        self.chain_up = chain_up
        self.root_fingerprint = root_fingerprint
        self._seed_tag = seed_tag
        self._next_serial = 1

    @property
    def name(self) -> str:
        return self.cert.subject_name

    def allocate_serial(self) -> int:
        serial = self._next_serial
        self._next_serial += 1
        return serial

    def sign(self, tbs: bytes) -> bytes:
        return self._key.sign(tbs)

    def derive_subject_key(self, *labels: bytes) -> SigningKey:
        return SigningKey.from_labels(self._seed_tag, *labels)


@dataclass
class CaHierarchy:
    store: TrustStore
    authorities: dict[str, CertAuthority]  # every CA by name
    issuers: tuple[str, ...]  # the deepest (leaf-issuing) authority per country

    def authority(self, name: str) -> CertAuthority:
        try:
            return self.authorities[name]
        except KeyError:
            raise UnknownAuthority(f"no issuing authority named {name!r}") from None


def _make_cert(subject: str, issuer: str, serial: int, window: tuple[int, int],
               subject_key: bytes, unique_id: str | None, is_ca: bool,
               signer: SigningKey) -> Certificate:
    unsigned = Certificate(subject, issuer, serial, window[0], window[1],
                           subject_key, unique_id, is_ca, signature=b"")
    return replace(unsigned, signature=signer.sign(unsigned.tbs_bytes()))


def generate_ca_hierarchy(country_count: int, intermediates_per_root: int,
                          seed: int) -> tuple[TrustStore, CaHierarchy]:
    """Build `country_count` root authorities, each with a chain of
    `intermediates_per_root` intermediates hanging off it.

    Fully deterministic in (country_count, intermediates_per_root, seed).
    """
    if country_count < 1:
        raise ValueError("country_count must be >= 1")
    if intermediates_per_root < 0:
        raise ValueError("intermediates_per_root must be >= 0")
    seed_tag = hash_parts(b"hierarchy-seed", seed.to_bytes(8, "big"))
    ca_window = (GENESIS, GENESIS + 50 * YEAR)

    trusted_roots: dict[bytes, bytes] = {}
    root_names: dict[str, bytes] = {}
    authorities: dict[str, CertAuthority] = {}
    issuers: list[str] = []

    for c in range(country_count):
        root_name = f"Country-{c + 1:02d} Root CA"
        root_key = SigningKey.from_labels(seed_tag, b"root", c.to_bytes(4, "big"))
        root_cert = _make_cert(root_name, root_name, serial=1, window=ca_window,
                               subject_key=root_key.public_bytes, unique_id=None,
                               is_ca=True, signer=root_key)
        root_fp = root_cert.fingerprint()
        trusted_roots[root_fp] = root_key.public_bytes
        root_names[root_name] = root_fp
        root_auth = CertAuthority(root_cert, root_key, chain_up=(), root_fingerprint=root_fp,
                                  seed_tag=hash_parts(seed_tag, root_name.encode()))
        root_auth.allocate_serial()  # serial 1 spent on the root itself
        authorities[root_name] = root_auth

        parent = root_auth
        for i in range(intermediates_per_root):
            name = f"Country-{c + 1:02d} Intermediate CA {i + 1}"
            key = SigningKey.from_labels(seed_tag, b"intermediate",
                                         c.to_bytes(4, "big"), i.to_bytes(4, "big"))
            cert = _make_cert(name, parent.name, parent.allocate_serial(), ca_window,
                              key.public_bytes, None, True, signer=parent._key)
            auth = CertAuthority(cert, key, chain_up=(cert,) + parent.chain_up,
                                 root_fingerprint=root_fp,
                                 seed_tag=hash_parts(seed_tag, name.encode()))
            authorities[name] = auth
            parent = auth
        issuers.append(parent.name)

    store = TrustStore(trusted_roots=trusted_roots,
                       allowed_authorities=frozenset(authorities),
                       root_names=root_names)
    hierarchy = CaHierarchy(store=store, authorities=authorities, issuers=tuple(issuers))
    return store, hierarchy


@dataclass
class IdentityCard:
    """An issued certificate chain together with the holder's signing key.

    The key never enters the serialized chain; it models the private key a
    national identity card keeps on-chip for challenge signing.
    """

    chain: CertChain
    holder_key: SigningKey = field(repr=False)

    @property
    def certificate(self) -> Certificate:
        return self.chain.leaf


def issue_identity_cert(hierarchy: CaHierarchy, authority_name: str, subject: str,
                        unique_id: str, validity: tuple[int, int]) -> IdentityCard:
    """Issue an end-entity certificate for `subject` under the named authority."""
    auth = hierarchy.authority(authority_name)
    serial = auth.allocate_serial()
    holder_key = auth.derive_subject_key(b"holder", serial.to_bytes(8, "big"), subject.encode())
    leaf = _make_cert(subject, auth.name, serial, validity, holder_key.public_bytes,
                      unique_id, is_ca=False, signer=auth._key)
    chain = CertChain(leaf=leaf, intermediates=auth.chain_up,
                      root_fingerprint=auth.root_fingerprint)
    return IdentityCard(chain=chain, holder_key=holder_key)


def validate_chain(chain: Union[CertChain, bytes], store: TrustStore, now: int,
                   crl: frozenset[tuple[str, int]] | None = None) -> ValidationReport:
    """Five-step chain validation.

    1. grammar (canonical decode, when raw bytes are given);
    2. validity window of every certificate;
    3. revocation against the optional (issuer, serial) set — skipped when absent;
    4. issuer/subject linkage and signature along the chain;
    5. the chain terminates at a trusted self-signed root from the store.
    """
    if isinstance(chain, (bytes, bytearray, memoryview)):
        try:
            chain = CertChain.from_bytes(bytes(chain))
        except DecodeError:
            return ValidationReport.fail(FailureCode.GRAMMAR_ERROR, now)

    certs = chain.certs()
    for cert in certs:
        if not (cert.not_before <= now <= cert.not_after):
            return ValidationReport.fail(FailureCode.EXPIRED, now)
    if crl:
        for cert in certs:
            if (cert.issuer_name, cert.serial) in crl:
                return ValidationReport.fail(FailureCode.REVOKED, now)
    for child, parent in zip(certs, certs[1:]):
        if child.issuer_name != parent.subject_name or not parent.is_ca:
            return ValidationReport.fail(FailureCode.CHAIN_BROKEN, now)
        if not verify_signature(parent.subject_public_key, child.signature, child.tbs_bytes()):
            return ValidationReport.fail(FailureCode.BAD_SIGNATURE, now)
    top = certs[-1]
    root_key = store.root_key(chain.root_fingerprint)
    if root_key is None or top.issuer_name not in store.allowed_authorities:
        return ValidationReport.fail(FailureCode.NOT_TRUSTED, now)
    if not verify_signature(root_key, top.signature, top.tbs_bytes()):
        return ValidationReport.fail(FailureCode.BAD_SIGNATURE, now)
    return ValidationReport.ok(now)


# ---------------------------------------------------------------------------
# Electronic passports
# ---------------------------------------------------------------------------

_CHECK_WEIGHTS = (7, 3, 1)


def icao_check_digit(data: str) -> int:
    """Standard 7-3-1 weighted check digit over A-Z, 0-9 and filler '<'."""
    total = 0
    for i, ch in enumerate(data):
        if ch.isdigit():
            v = int(ch)
        elif "A" <= ch <= "Z":
            v = ord(ch) - ord("A") + 10
        elif ch == "<":
            v = 0
        else:
            raise ValueError(f"character {ch!r} not in the check-digit alphabet")
        total += v * _CHECK_WEIGHTS[i % 3]
    return total % 10


@dataclass(frozen=True)
class Dg1:
    """The fourteen machine-readable-zone data elements."""

    document_type: str
    issuing_state: str
    name: str
    document_number: str
    document_number_cd: int
    nationality: str
    birth_date: str  # YYMMDD
    birth_date_cd: int
    sex: str
    expiry_date: str  # YYMMDD
    expiry_date_cd: int
    optional_data: str
    optional_data_cd: int
    composite_cd: int

    @classmethod
    def build(cls, *, document_type: str = "P", issuing_state: str, name: str,
              document_number: str, nationality: str, birth_date: str, sex: str,
              expiry_date: str, optional_data: str = "") -> "Dg1":
        doc_cd = icao_check_digit(document_number)
        birth_cd = icao_check_digit(birth_date)
        expiry_cd = icao_check_digit(expiry_date)
        opt_cd = icao_check_digit(optional_data) if optional_data else 0
        composite = icao_check_digit(
            f"{document_number}{doc_cd}{birth_date}{birth_cd}"
            f"{expiry_date}{expiry_cd}{optional_data}{opt_cd}"
        )
        return cls(document_type, issuing_state, name, document_number, doc_cd,
                   nationality, birth_date, birth_cd, sex, expiry_date, expiry_cd,
                   optional_data, opt_cd, composite)

    def to_bytes(self) -> bytes:
        return (
            Encoder("dg1:v1")
            .put_text(self.document_type).put_text(self.issuing_state).put_text(self.name)
            .put_text(self.document_number).put_u64(self.document_number_cd)
            .put_text(self.nationality)
            .put_text(self.birth_date).put_u64(self.birth_date_cd)
            .put_text(self.sex)
            .put_text(self.expiry_date).put_u64(self.expiry_date_cd)
            .put_text(self.optional_data).put_u64(self.optional_data_cd)
            .put_u64(self.composite_cd)
            .done()
        )

    @classmethod
    def from_bytes(cls, blob: bytes) -> "Dg1":
        d = Decoder(blob, "dg1:v1")
        out = cls(d.take_text(), d.take_text(), d.take_text(),
                  d.take_text(), d.take_u64(), d.take_text(),
                  d.take_text(), d.take_u64(), d.take_text(),
                  d.take_text(), d.take_u64(), d.take_text(), d.take_u64(), d.take_u64())
        d.finish()
        return out


def expiry_timestamp(expiry_date: str) -> int:
    """YYMMDD expiry (end of day, UTC) to unix seconds; years map into 2000-2099."""
    year, month, day = 2000 + int(expiry_date[:2]), int(expiry_date[2:4]), int(expiry_date[4:6])
    end = _dt.datetime(year, month, day, 23, 59, 59, tzinfo=_dt.timezone.utc)
    return int(end.timestamp())


@dataclass(frozen=True)
class HolderFields:
    name: str
    document_number: str
    nationality: str
    birth_date: str
    sex: str
    expiry_date: str
    issuing_state: str
    optional_data: str = ""
    personal_number: str | None = None


@dataclass(frozen=True)
class EPassport:
    dg1: Dg1
    dg11_personal_number: str | None
    dg15_public_key: bytes | None
    sod_dg_hashes: tuple[tuple[int, bytes], ...]  # sorted (group, digest) pairs
    sod_signature: bytes
    dsc: Certificate
    aa_secret: SigningKey | None = field(repr=False, compare=False, default=None)

    def dg_hash(self, group: int) -> bytes | None:
        for g, h in self.sod_dg_hashes:
            if g == group:
                return h
        return None

    def computed_dg_hashes(self) -> tuple[tuple[int, bytes], ...]:
        groups: list[tuple[int, bytes]] = [(1, hash_parts(b"dg", b"\x01", self.dg1.to_bytes()))]
        if self.dg11_personal_number is not None:
            groups.append((11, hash_parts(b"dg", b"\x0b", self.dg11_personal_number.encode())))
        if self.dg15_public_key is not None:
            groups.append((15, hash_parts(b"dg", b"\x0f", self.dg15_public_key)))
        return tuple(sorted(groups))

    def sod_payload(self) -> bytes:
        enc = Encoder("sod:v1").put_u64(len(self.sod_dg_hashes))
        for group, digest in self.sod_dg_hashes:
            enc.put_u64(group).put_bytes(digest)
        return enc.done()

    def public_bytes(self) -> bytes:
        """Everything a reader can lift off the document; chip key excluded."""
        return (
            Encoder("epassport:v1")
            .put_bytes(self.dg1.to_bytes())
            .put_opt_text(self.dg11_personal_number)
            .put_opt_bytes(self.dg15_public_key)
            .put_bytes(self.sod_payload())
            .put_bytes(self.sod_signature)
            .put_bytes(self.dsc.to_bytes())
            .done()
        )

    @classmethod
    def from_bytes(cls, blob: bytes) -> "EPassport":
        d = Decoder(blob, "epassport:v1")
        dg1 = Dg1.from_bytes(d.take_bytes())
        dg11 = d.take_opt_text()
        dg15 = d.take_opt_bytes()
        sod_payload = d.take_bytes()
        sod_signature = d.take_bytes()
        dsc = Certificate.from_bytes(d.take_bytes())
        d.finish()
        sd = Decoder(sod_payload, "sod:v1")
        count = sd.take_u64()
        hashes = tuple((sd.take_u64(), sd.take_bytes()) for _ in range(count))
        sd.finish()
        return cls(dg1=dg1, dg11_personal_number=dg11, dg15_public_key=dg15,
                   sod_dg_hashes=hashes, sod_signature=sod_signature, dsc=dsc)


class DscHandle:
    """Document-signer handle: certificate plus its private key."""

    def __init__(self, cert: Certificate, key: SigningKey):
        self.cert = cert
        self._key = key

    def sign(self, payload: bytes) -> bytes:
        return self._key.sign(payload)


def issue_dsc(csca: CertAuthority, label: str, validity: tuple[int, int]) -> DscHandle:
    """Issue a document-signer certificate directly under a country root."""
    serial = csca.allocate_serial()
    key = csca.derive_subject_key(b"dsc", serial.to_bytes(8, "big"), label.encode())
    cert = _make_cert(f"{csca.name} DSC {label}", csca.name, serial, validity,
                      key.public_bytes, None, is_ca=False, signer=csca._key)
    return DscHandle(cert, key)


def issue_epassport(csca: CertAuthority, dsc: DscHandle, holder: HolderFields,
                    with_aa: bool, seed: int) -> EPassport:
    """Assemble a passport whose security object the given DSC signs.

    with_aa=False leaves both the chip key and its public data group absent.
    """
    if dsc.cert.issuer_name != csca.name:
        raise UnknownAuthority("document signer was not issued by the given country root")
    dg1 = Dg1.build(issuing_state=holder.issuing_state, name=holder.name,
                    document_number=holder.document_number, nationality=holder.nationality,
                    birth_date=holder.birth_date, sex=holder.sex,
                    expiry_date=holder.expiry_date, optional_data=holder.optional_data)
    aa_secret = None
    dg15 = None
    if with_aa:
        aa_secret = SigningKey.from_labels(b"chip-key", seed.to_bytes(8, "big"),
                                           holder.document_number.encode())
        dg15 = aa_secret.public_bytes
    draft = EPassport(dg1=dg1, dg11_personal_number=holder.personal_number,
                      dg15_public_key=dg15, sod_dg_hashes=(), sod_signature=b"",
                      dsc=dsc.cert, aa_secret=aa_secret)
    hashes = draft.computed_dg_hashes()
    draft = replace(draft, sod_dg_hashes=hashes)
    return replace(draft, sod_signature=dsc.sign(draft.sod_payload()))


def validate_epassport(passport: EPassport, csca_store: TrustStore, now: int) -> ValidationReport:
    """Passive-authentication checks, in fixed order.

    (a) every populated data group hashes to its security-object entry;
    (b) the security-object signature verifies under the document signer;
    (c) the document signer traces to a trusted country root;
    (d) the document and signer are inside their validity windows.
    """
    if passport.computed_dg_hashes() != passport.sod_dg_hashes:
        return ValidationReport.fail(FailureCode.HASH_MISMATCH, now)
    if not verify_signature(passport.dsc.subject_public_key, passport.sod_signature,
                            passport.sod_payload()):
        return ValidationReport.fail(FailureCode.BAD_SIGNATURE, now)
    root_fp = csca_store.root_names.get(passport.dsc.issuer_name)
    root_key = csca_store.root_key(root_fp) if root_fp is not None else None
    if (root_key is None
            or passport.dsc.issuer_name not in csca_store.allowed_authorities
            or not verify_signature(root_key, passport.dsc.signature, passport.dsc.tbs_bytes())):
        return ValidationReport.fail(FailureCode.NOT_TRUSTED, now)
    if not (passport.dsc.not_before <= now <= passport.dsc.not_after
            and now <= expiry_timestamp(passport.dg1.expiry_date)):
        return ValidationReport.fail(FailureCode.EXPIRED, now)
    return ValidationReport.ok(now)


# ---------------------------------------------------------------------------
# Cross-document helpers
# ---------------------------------------------------------------------------

Document = Union[Certificate, CertChain, IdentityCard, EPassport]


def extract_unique_id(doc: Document) -> str:
    """The document's unique identifier.

    Certificates carry it in an explicit field; passports prefer the personal
    number and fall back to the document number.
    """
    if isinstance(doc, IdentityCard):
        doc = doc.chain
    if isinstance(doc, CertChain):
        doc = doc.leaf
    if isinstance(doc, Certificate):
        if doc.unique_id_field is None:
            raise MissingIdentifier("certificate has no unique identifier field")
        return doc.unique_id_field
    if isinstance(doc, EPassport):
        if doc.dg11_personal_number is not None:
            return doc.dg11_personal_number
        return doc.dg1.document_number
    raise TypeError(f"cannot extract an identifier from {type(doc).__name__}")


def active_auth_sign(doc: Union[IdentityCard, EPassport], message: bytes) -> bytes:
    """Deterministic challenge signature by the document's resident key."""
    framed = hash_parts(_AA_CONTEXT, message)
    if isinstance(doc, IdentityCard):
        return doc.holder_key.sign(framed)
    if isinstance(doc, EPassport):
        if doc.aa_secret is None:
            raise NoActiveAuthentication("passport has no chip signing key")
        return doc.aa_secret.sign(framed)
    raise NoActiveAuthentication(f"{type(doc).__name__} cannot sign challenges")


def active_auth_verify(public_key: bytes, message: bytes, signature: bytes) -> bool:
    return verify_signature(public_key, signature, hash_parts(_AA_CONTEXT, message))


def document_public_key(doc: Union[IdentityCard, CertChain, EPassport]) -> bytes:
    """The verification key challenge signatures are checked against."""
    if isinstance(doc, IdentityCard):
        doc = doc.chain
    if isinstance(doc, CertChain):
        return doc.leaf.subject_public_key
    if isinstance(doc, EPassport):
        if doc.dg15_public_key is None:
            raise NoActiveAuthentication("passport publishes no chip verification key")
        return doc.dg15_public_key
    raise TypeError(f"{type(doc).__name__} has no document key")


def document_public_bytes(doc: Union[IdentityCard, CertChain, EPassport]) -> bytes:
    if isinstance(doc, IdentityCard):
        return doc.chain.to_bytes()
    if isinstance(doc, CertChain):
        return doc.to_bytes()
    if isinstance(doc, EPassport):
        return doc.public_bytes()
    raise TypeError(f"cannot serialize {type(doc).__name__}")


def document_hash(doc: Union[IdentityCard, CertChain, EPassport]) -> bytes:
    """Stable digest of the document's public form; used as a derivation salt."""
    return hash_parts(b"document-hash", document_public_bytes(doc))
