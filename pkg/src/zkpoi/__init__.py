"""Sybil-resistant anonymous registration from government-issued documents,
with the game-theoretic apparatus that makes honest participation pay.

The pipeline: validate a certificate chain or electronic passport, derive an
unlinkable per-network pseudonym from a deterministic document signature,
prove the derivation to an attested registry that admits each person once,
then study the surrounding incentives — per-epoch cooperation games over
sharded validation, mining as a congestion game, reward-regime dominance,
network effects between competing payment networks, and token circulation.
"""

__version__ = "0.1.0"

from . import (  # noqa: F401
    accumulator,
    attestation,
    codec,
    credential,
    crypto,
    econ,
    errors,
    identity,
    registry,
    shardgame,
)

__all__ = [
    "__version__",
    "accumulator",
    "attestation",
    "codec",
    "credential",
    "crypto",
    "econ",
    "errors",
    "identity",
    "registry",
    "shardgame",
]
