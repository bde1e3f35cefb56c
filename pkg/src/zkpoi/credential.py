"""Pseudonym derivation and the transparent registration-bundle verifier.

A registration bundle binds a fresh public key to a deterministic
per-network pseudonym:

    pseudonym digest = Hash(secret || network id || unique id)

with length-prefixed framing, where the secret is the document's
deterministic signature over a fixed common string (so the same document
always yields the same pseudonym on the same network), and the REG/OFF
suffix rides alongside the digest rather than inside the hash.

Documents without challenge-signing support take a degraded path: the
secret becomes a key-derivation output over the holder's passphrase, the
key-binding and secret-verification steps drop out, and determinism holds
only per (document, passphrase).

Verification re-executes every generation-side check against the evidence
disclosed inside an attested session; there is no succinct proof object,
the verifier simply reruns the predicate.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

from .codec import Decoder, Encoder, frame_parts
from .crypto import SigningKey, hash_parts, pbkdf2_sha256, sha256, verify_signature
from .errors import DecodeError, EmptyPassphrase, InvalidDocument, NoActiveAuthentication
from .identity import (
    CertChain,
    EPassport,
    IdentityCard,
    TrustStore,
    active_auth_sign,
    active_auth_verify,
    document_hash,
    document_public_bytes,
    document_public_key,
    extract_unique_id,
    validate_chain,
    validate_epassport,
)

SUFFIX_REG = "REG"
SUFFIX_OFF = "OFF"

AA_MODE_FULL = "full"
AA_MODE_ABSENT = "absent"

# Versioned so a future change of the common string cannot silently collide
# with pseudonyms minted under this one.
PREFIXED_COMMON_STRING = "zkpoi/pseudonym-secret/v1"

DEFAULT_KDF_ITERATIONS = 2048
# The degraded path cannot anchor unpredictability in a chip signature, so it
# spends more KDF work instead of less to keep offline guessing expensive.
AA_ABSENT_ITERATION_MULTIPLIER = 8

_DOC_KIND_CHAIN = "card-chain"
_DOC_KIND_EPASSPORT = "epassport"


@dataclass(frozen=True)
class KdfParams:
    iteration_count: int
    salt: bytes  # derived from the document's public hash
    output_len: int = 32

    def __post_init__(self):
        if self.iteration_count < 1:
            raise ValueError("iteration_count must be >= 1")

    @classmethod
    def for_document(cls, doc, iteration_count: int = DEFAULT_KDF_ITERATIONS) -> "KdfParams":
        return cls(iteration_count=iteration_count, salt=document_hash(doc))


@dataclass
class DerivedKeyPair:
    pk: bytes
    sk: SigningKey = field(repr=False)


@dataclass(frozen=True)
class Pseudonym:
    digest: bytes
    suffix: str

    def __post_init__(self):
        if self.suffix not in (SUFFIX_REG, SUFFIX_OFF):
            raise ValueError(f"suffix must be {SUFFIX_REG} or {SUFFIX_OFF}")

    def label(self) -> str:
        return f"{self.digest.hex()}:{self.suffix}"

    def with_suffix(self, suffix: str) -> "Pseudonym":
        return Pseudonym(self.digest, suffix)


def derive_keypair(passphrase: str, doc_hash: bytes, params: KdfParams) -> DerivedKeyPair:
    """Deterministic keypair from a passphrase and document hash.

    The same (passphrase, document, parameters) always reproduce the same
    keys, which is what lets a holder recover a lost wallet key.
    """
    if not passphrase:
        raise EmptyPassphrase("a passphrase is mandatory")
    salt = hash_parts(b"kdf-salt", doc_hash, params.salt,
                      params.iteration_count.to_bytes(8, "big"))
    seed = pbkdf2_sha256(passphrase, salt, params.iteration_count, params.output_len)
    sk = SigningKey.from_seed(seed[:32])
    return DerivedKeyPair(pk=sk.public_bytes, sk=sk)


def compute_signature_secret(doc, prefixed_common_string: str = PREFIXED_COMMON_STRING) -> bytes:
    """The document's deterministic signature over the fixed common string.

    Unpredictable without the document key, yet verifiable against its
    public key, and identical on every invocation.
    """
    return active_auth_sign(doc, prefixed_common_string.encode("utf-8"))


def verify_signature_secret(doc_public_key: bytes, secret: bytes,
                            prefixed_common_string: str = PREFIXED_COMMON_STRING) -> bool:
    return active_auth_verify(doc_public_key, prefixed_common_string.encode("utf-8"), secret)


def derive_pseudonym(signature_secret: bytes, blockchain_id: str, unique_id: str,
                     suffix: str = SUFFIX_REG) -> Pseudonym:
    """Hash the framed concatenation of secret, network id and unique id.

    The suffix is appended after hashing (carried beside the digest), so the
    registration and removal forms share a digest but never compare equal.
    """
    if not signature_secret or not blockchain_id or not unique_id:
        raise ValueError("all pseudonym inputs must be non-empty")
    digest = sha256(frame_parts(signature_secret,
                                blockchain_id.encode("utf-8"),
                                unique_id.encode("utf-8")))
    return Pseudonym(digest=digest, suffix=suffix)


@dataclass(frozen=True)
class TransparentEvidence:
    """What the prover discloses inside a verification session: the public
    document and the pseudonym secret. Never leaves a sealed channel."""

    doc_kind: str  # card-chain | epassport
    doc_bytes: bytes
    secret: bytes
    aa_mode: str

    def decode_document(self):
        if self.doc_kind == _DOC_KIND_CHAIN:
            return CertChain.from_bytes(self.doc_bytes)
        if self.doc_kind == _DOC_KIND_EPASSPORT:
            return EPassport.from_bytes(self.doc_bytes)
        raise DecodeError(f"unknown document kind {self.doc_kind!r}")


@dataclass(frozen=True)
class RegistrationBundle:
    pseudonym: Pseudonym
    pk: bytes
    sign_pk: bytes | None  # document signature over pk; absent on the degraded path
    evidence: TransparentEvidence

    def to_bytes(self) -> bytes:
        return (
            Encoder("bundle:v1")
            .put_bytes(self.pseudonym.digest)
            .put_text(self.pseudonym.suffix)
            .put_bytes(self.pk)
            .put_opt_bytes(self.sign_pk)
            .put_text(self.evidence.doc_kind)
            .put_bytes(self.evidence.doc_bytes)
            .put_bytes(self.evidence.secret)
            .put_text(self.evidence.aa_mode)
            .done()
        )

    @classmethod
    def from_bytes(cls, blob: bytes) -> "RegistrationBundle":
        d = Decoder(blob, "bundle:v1")
        digest = d.take_bytes()
        suffix = d.take_text()
        pk = d.take_bytes()
        sign_pk = d.take_opt_bytes()
        evidence = TransparentEvidence(doc_kind=d.take_text(), doc_bytes=d.take_bytes(),
                                       secret=d.take_bytes(), aa_mode=d.take_text())
        d.finish()
        if suffix not in (SUFFIX_REG, SUFFIX_OFF):
            raise DecodeError("bundle carries an unknown pseudonym suffix")
        if evidence.aa_mode not in (AA_MODE_FULL, AA_MODE_ABSENT):
            raise DecodeError("bundle carries an unknown authentication mode")
        return cls(Pseudonym(digest, suffix), pk, sign_pk, evidence)


@dataclass(frozen=True)
class BundleVerdict:
    accepted: bool
    failed_step: int | None = None  # 3..7, first check that failed
    reason: str | None = None

    @property
    def code(self) -> str | None:
        return None if self.failed_step is None else f"step{self.failed_step}"

    @staticmethod
    def fail(step: int, reason: str) -> "BundleVerdict":
        return BundleVerdict(False, step, reason)


def _validate_document(doc, trust_store: TrustStore, now: int):
    if isinstance(doc, (IdentityCard, CertChain)):
        chain = doc.chain if isinstance(doc, IdentityCard) else doc
        return validate_chain(chain, trust_store, now)
    if isinstance(doc, EPassport):
        return validate_epassport(doc, trust_store, now)
    raise TypeError(f"cannot validate {type(doc).__name__}")


def _absent_mode_secret(passphrase: str, doc_hash: bytes, iteration_count: int) -> bytes:
    salt = hash_parts(b"degraded-secret-salt", doc_hash)
    return pbkdf2_sha256(passphrase, salt,
                         iteration_count * AA_ABSENT_ITERATION_MULTIPLIER, 32)


def build_registration_bundle(doc, passphrase: str, blockchain_id: str,
                              trust_store: TrustStore, now: int, *,
                              aa_mode: str = AA_MODE_FULL, suffix: str = SUFFIX_REG,
                              kdf_iterations: int = DEFAULT_KDF_ITERATIONS,
                              prefixed_common_string: str = PREFIXED_COMMON_STRING,
                              ) -> tuple[RegistrationBundle, DerivedKeyPair]:
    """Run the full generation pipeline on a validated document.

    Returns the bundle together with the derived keypair; only the public
    half enters the bundle. Raises InvalidDocument when validation rejects
    the document and NoActiveAuthentication when aa_mode="full" is asked of
    a document that cannot sign challenges.
    """
    if aa_mode not in (AA_MODE_FULL, AA_MODE_ABSENT):
        raise ValueError(f"unknown aa_mode {aa_mode!r}")
    report = _validate_document(doc, trust_store, now)
    if not report.accepted:
        raise InvalidDocument(report)
    unique_id = extract_unique_id(doc)
    doc_digest = document_hash(doc)
    keypair = derive_keypair(passphrase, doc_digest,
                             KdfParams(iteration_count=kdf_iterations, salt=doc_digest))
    if aa_mode == AA_MODE_FULL:
        secret = compute_signature_secret(doc, prefixed_common_string)
        sign_pk = active_auth_sign(doc, keypair.pk)
    else:
        secret = _absent_mode_secret(passphrase, doc_digest, kdf_iterations)
        sign_pk = None
    pseudonym = derive_pseudonym(secret, blockchain_id, unique_id, suffix)
    kind = _DOC_KIND_EPASSPORT if isinstance(doc, EPassport) else _DOC_KIND_CHAIN
    evidence = TransparentEvidence(doc_kind=kind, doc_bytes=document_public_bytes(doc),
                                   secret=secret, aa_mode=aa_mode)
    return RegistrationBundle(pseudonym, keypair.pk, sign_pk, evidence), keypair


def verify_registration_bundle(bundle: RegistrationBundle, trust_store: TrustStore,
                               blockchain_id: str, now: int, *,
                               expected_suffix: str | None = None,
                               prefixed_common_string: str = PREFIXED_COMMON_STRING,
                               ) -> BundleVerdict:
    """Re-execute the generation checks; report the first failing step.

    Step 3 validates the disclosed document, step 4 extracts the unique id,
    step 5 recomputes the pseudonym, step 6 checks the key binding and step
    7 checks the secret itself. Steps 6-7 apply only to full-mode bundles.
    """
    try:
        doc = bundle.evidence.decode_document()
    except DecodeError as exc:
        return BundleVerdict.fail(3, f"evidence does not decode: {exc}")
    report = _validate_document(doc, trust_store, now)
    if not report.accepted:
        return BundleVerdict.fail(3, f"document rejected: {report.failure_code.value}")

    try:
        unique_id = extract_unique_id(doc)
    except Exception as exc:
        return BundleVerdict.fail(4, f"unique id extraction failed: {exc}")

    expected = derive_pseudonym(bundle.evidence.secret, blockchain_id, unique_id,
                                bundle.pseudonym.suffix)
    if expected.digest != bundle.pseudonym.digest:
        return BundleVerdict.fail(5, "pseudonym digest does not recompute")
    if expected_suffix is not None and bundle.pseudonym.suffix != expected_suffix:
        return BundleVerdict.fail(5, f"expected a {expected_suffix}-suffix pseudonym")

    if bundle.evidence.aa_mode == AA_MODE_FULL:
        try:
            doc_pk = document_public_key(doc)
        except NoActiveAuthentication:
            return BundleVerdict.fail(6, "document publishes no signing key")
        if bundle.sign_pk is None or not active_auth_verify(doc_pk, bundle.pk, bundle.sign_pk):
            return BundleVerdict.fail(6, "key binding signature does not verify")
        if not verify_signature_secret(doc_pk, bundle.evidence.secret, prefixed_common_string):
            return BundleVerdict.fail(7, "pseudonym secret does not verify")
    return BundleVerdict(True)


def kdf_wall_time(passphrase: str, doc_hash: bytes, iteration_count: int) -> float:
    """Seconds one derivation takes; exists so tests can assert the cost of a
    brute-force attempt grows with the iteration count."""
    start = time.perf_counter()
    derive_keypair(passphrase, doc_hash, KdfParams(iteration_count, salt=doc_hash))
    return time.perf_counter() - start
