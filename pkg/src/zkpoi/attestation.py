"""Simulated mutual attestation between client and verifier logic.

Both endpoints present a measurement (hash of a named code identity plus a
version). When both match the policy, the pair shares a fresh symmetric
session key and the client gets an unlinkable random token, standing in for
group-signature-based anonymous attestation. Registration evidence crosses
module boundaries only inside payloads sealed under the session key, so a
host observing the verifier's state never sees it in the clear.

No side channels or quote wire formats are modeled; the trust restriction
to known-good code is exactly the policy set.
"""

from __future__ import annotations

import secrets
from dataclasses import dataclass, field

from .crypto import ByteStream, hash_parts, seal_bytes, unseal_bytes
from .errors import MeasurementMismatch

_TOKEN_LEN = 32
_KEY_LEN = 32


@dataclass(frozen=True)
class EnclaveIdentity:
    """A named code identity at a specific version."""

    name: str
    version: int

    @property
    def measurement(self) -> bytes:
        # Same name and version always measure the same; any change to either
        # produces an unrelated digest.
        return hash_parts(b"enclave-measurement", self.name.encode("utf-8"),
                          self.version.to_bytes(8, "big"))


@dataclass(frozen=True)
class AttestationPolicy:
    """Measurements the handshake accepts, with a version floor."""

    allowed_measurements: frozenset[bytes]
    min_version: int = 0

    @classmethod
    def expecting(cls, *identities: EnclaveIdentity, min_version: int = 0) -> "AttestationPolicy":
        return cls(frozenset(i.measurement for i in identities), min_version)

    def admits(self, identity: EnclaveIdentity) -> bool:
        return (identity.measurement in self.allowed_measurements
                and identity.version >= self.min_version)


class AttestationSession:
    """An established mutually-attested channel.

    The session key never serializes; the client token is fresh per session
    so two sessions of the same client cannot be linked to each other.
    """

    def __init__(self, session_key: bytes, client_token: bytes,
                 peers: tuple[EnclaveIdentity, EnclaveIdentity]):
        self._session_key = session_key
        self.client_token = client_token
        self.peers = peers
        self.policy_ok = True
        self._seal_counter = 0

    @property
    def client(self) -> EnclaveIdentity:
        return self.peers[0]

    @property
    def server(self) -> EnclaveIdentity:
        return self.peers[1]

    def __repr__(self) -> str:
        return (f"AttestationSession(token={self.client_token.hex()[:16]}..., "
                f"client={self.client.name}, server={self.server.name})")


def mutual_attest(client: EnclaveIdentity, server: EnclaveIdentity,
                  policy: AttestationPolicy, rng: ByteStream | None = None,
                  ) -> AttestationSession:
    """Handshake: admit both sides under the policy or name the failing one.

    Pass a deterministic byte stream as `rng` to make session material
    reproducible in seeded experiments; the default draws real entropy.
    """
    if not policy.admits(client):
        raise MeasurementMismatch("client", f"{client.name} v{client.version}")
    if not policy.admits(server):
        raise MeasurementMismatch("server", f"{server.name} v{server.version}")
    if rng is None:
        session_key = secrets.token_bytes(_KEY_LEN)
        client_token = secrets.token_bytes(_TOKEN_LEN)
    else:
        session_key = rng.take(_KEY_LEN)
        client_token = rng.take(_TOKEN_LEN)
    return AttestationSession(session_key, client_token, (client, server))


def seal(session: AttestationSession, payload: bytes) -> bytes:
    """Encrypt a payload so only this session can read it back."""
    blob = seal_bytes(session._session_key, session._seal_counter, payload,
                      aad=session.client_token)
    session._seal_counter += 1
    return blob


def unseal(session: AttestationSession, blob: bytes) -> bytes:
    """Decrypt a sealed payload; fails for material from any other session."""
    return unseal_bytes(session._session_key, blob, aad=session.client_token)
