"""Walk an identity document from issuance to validation, then break it.

Builds a small multi-country trust infrastructure, issues a national identity
certificate and a biometric passport, validates both, and then shows that each
class of forgery or decay is rejected with a distinct failure code.

Run with: python3 demos/identity_pipeline.py
"""

from __future__ import annotations

import dataclasses

from zkpoi import identity

GENESIS, YEAR = identity.GENESIS, identity.YEAR
WINDOW = (GENESIS, GENESIS + 10 * YEAR)
NOW = GENESIS + YEAR


def banner(title: str) -> None:
    print(f"\n=== {title} " + "=" * max(0, 60 - len(title)))


def show(label: str, report) -> None:
    code = report.failure_code.value if report.failure_code else "-"
    print(f"  {label:<38} verdict={str(report.verdict):<5} code={code}")


def main() -> None:
    banner("1. Trust infrastructure")
    store, hierarchy = identity.generate_ca_hierarchy(
        country_count=3, intermediates_per_root=2, seed=42)
    print(f"  roots: {len(store.trusted_roots)}  "
          f"authorities known to validators: {len(store.allowed_authorities)}")
    print(f"  issuing authorities (one per country): {list(hierarchy.issuers)}")

    banner("2. National identity certificate")
    card = identity.issue_identity_cert(
        hierarchy, hierarchy.issuers[0], "Avery Example", "UID-00000001", WINDOW)
    leaf = card.certificate
    print(f"  subject={leaf.subject_name!r} issuer={leaf.issuer_name!r} "
          f"serial={leaf.serial}")
    print(f"  chain length: 1 leaf + {len(card.chain.intermediates)} intermediates")
    show("freshly issued chain", identity.validate_chain(card.chain, store, NOW))

    banner("3. Biometric passport")
    pass_store, pass_hier = identity.generate_ca_hierarchy(2, 0, seed=43)
    csca = pass_hier.authorities[pass_hier.issuers[0]]
    dsc = identity.issue_dsc(csca, "document-signer-01", WINDOW)
    holder = identity.HolderFields(
        name="EXAMPLE AVERY", document_number="P0000001", nationality="UTO",
        birth_date="900101", sex="X", expiry_date="400101", issuing_state="UTO")
    passport = identity.issue_epassport(csca, dsc, holder, with_aa=True, seed=7)
    dg1 = passport.dg1
    print(f"  data group 1: {dg1.document_type} {dg1.document_number} "
          f"{dg1.name!r} ({dg1.nationality}, expires {dg1.expiry_date})")
    print(f"  security object covers {len(passport.sod_dg_hashes)} data groups; "
          f"chip key present: {passport.dg15_public_key is not None}")
    show("genuine passport", identity.validate_epassport(passport, pass_store, NOW))

    banner("4. Every forgery class gets its own rejection")
    expired_at = WINDOW[1] + YEAR
    show("certificate past its window",
         identity.validate_chain(card.chain, store, expired_at))

    tampered = dataclasses.replace(card.chain, leaf=dataclasses.replace(
        leaf, signature=bytes(len(leaf.signature))))
    show("zeroed leaf signature", identity.validate_chain(tampered, store, NOW))

    orphaned = dataclasses.replace(card.chain,
                                   intermediates=card.chain.intermediates[1:])
    show("leaf's parent dropped from chain",
         identity.validate_chain(orphaned, store, NOW))

    foreign_store, foreign = identity.generate_ca_hierarchy(1, 2, seed=99)
    stranger = identity.issue_identity_cert(
        foreign, foreign.issuers[0], "Nobody Known", "UID-FOREIGN", WINDOW)
    show("chain from an unrecognized root",
         identity.validate_chain(stranger.chain, store, NOW))

    edited = dataclasses.replace(passport, dg1=dataclasses.replace(
        passport.dg1, name="EXAMPLE SOMEBODY ELSE"))
    show("passport data edited under intact seal",
         identity.validate_epassport(edited, pass_store, NOW))

    revoked = identity.validate_chain(
        card.chain, store, NOW,
        crl=frozenset({(leaf.issuer_name, leaf.serial)}))
    show("certificate on the revocation list", revoked)

    print("\nEach failure mode surfaces before any later check runs, so a")
    print("single code always names the first broken layer.")


if __name__ == "__main__":
    main()
