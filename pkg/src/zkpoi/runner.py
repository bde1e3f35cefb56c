"""Seeded experiment runner behind the command-line interface.

Each scenario is a pure function of (validated params, seed) returning a
table plus a summary; the runner serializes the result (CSV or JSON),
writes it where asked, and emits a manifest with content checksums so that
identical config + seed provably yields identical bytes.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import os
from dataclasses import dataclass

from . import __version__, attestation, credential, identity, registry, shardgame
from .codec import canonical_json
from .econ import circulation as circ
from .econ import congestion as cong
from .econ import games, network
from .errors import ConfigInvalid, IoFailure

SCHEMA_VERSION = 1
FLOAT_FORMAT = ".9g"


# ---------------------------------------------------------------------------
# Config plumbing
# ---------------------------------------------------------------------------


def _fail(path: str, message: str):
    raise ConfigInvalid(f"{path}: {message}")


def load_config(path) -> dict:
    try:
        with open(path, "rb") as fh:
            raw = fh.read()
    except OSError as exc:
        raise ConfigInvalid(f"config: cannot read {path}: {exc}") from exc
    try:
        config = json.loads(raw)
    except ValueError as exc:
        raise ConfigInvalid(f"config: not valid JSON: {exc}") from exc
    if not isinstance(config, dict):
        _fail("config", "top level must be a JSON object")
    return config


def resolve_seed(config: dict, flag_seed: int | None, env=None) -> int:
    """Explicit --seed wins; otherwise the ZKPOI_SEED variable overrides the
    config value; otherwise the config value; otherwise zero."""
    env = os.environ if env is None else env
    if flag_seed is not None:
        return flag_seed
    env_seed = env.get("ZKPOI_SEED")
    if env_seed is not None:
        try:
            return int(env_seed)
        except ValueError:
            _fail("ZKPOI_SEED", f"must be an integer, got {env_seed!r}")
    seed = config.get("seed", 0)
    if not isinstance(seed, int) or isinstance(seed, bool):
        _fail("seed", "must be an integer")
    if not -(2**63) <= seed < 2**64:
        _fail("seed", "must fit in 64 bits")
    return seed


class _Params:
    """Schema-checked view over the config's params object; every getter
    records its key so unknown keys can be rejected with a field path."""

    def __init__(self, raw: dict):
        if not isinstance(raw, dict):
            _fail("params", "must be a JSON object")
        self.raw = raw
        self.seen: set[str] = set()

    def _get(self, key, default):
        self.seen.add(key)
        return self.raw.get(key, default)

    def integer(self, key, default, lo=None, hi=None):
        value = self._get(key, default)
        if not isinstance(value, int) or isinstance(value, bool):
            _fail(f"params.{key}", "must be an integer")
        if lo is not None and value < lo:
            _fail(f"params.{key}", f"must be >= {lo}")
        if hi is not None and value > hi:
            _fail(f"params.{key}", f"must be <= {hi}")
        return value

    def number(self, key, default, lo=None, hi=None, *, exclusive=False):
        value = self._get(key, default)
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            _fail(f"params.{key}", "must be a number")
        value = float(value)
        if lo is not None and (value <= lo if exclusive else value < lo):
            _fail(f"params.{key}", f"must be {'>' if exclusive else '>='} {lo}")
        if hi is not None and value > hi:
            _fail(f"params.{key}", f"must be <= {hi}")
        return value

    def text(self, key, default, choices=None):
        value = self._get(key, default)
        if not isinstance(value, str):
            _fail(f"params.{key}", "must be a string")
        if choices is not None and value not in choices:
            _fail(f"params.{key}", f"must be one of {sorted(choices)}")
        return value

    def boolean(self, key, default):
        value = self._get(key, default)
        if not isinstance(value, bool):
            _fail(f"params.{key}", "must be a boolean")
        return value

    def number_list(self, key, default, lo=None, hi=None):
        value = self._get(key, list(default))
        if not isinstance(value, list) or not value:
            _fail(f"params.{key}", "must be a non-empty array of numbers")
        out = []
        for i, v in enumerate(value):
            if isinstance(v, bool) or not isinstance(v, (int, float)):
                _fail(f"params.{key}[{i}]", "must be a number")
            v = float(v)
            if (lo is not None and v < lo) or (hi is not None and v > hi):
                _fail(f"params.{key}[{i}]", f"must lie in [{lo}, {hi}]")
            out.append(v)
        return out

    def reject_unknown(self):
        unknown = sorted(set(self.raw) - self.seen)
        if unknown:
            _fail(f"params.{unknown[0]}", "unknown parameter")


@dataclass
class ScenarioResult:
    columns: list[str]
    rows: list[dict]
    summary: dict
    default_format: str = "csv"


@dataclass
class RunManifest:
    scenario: str
    config_hash: str
    seed: int
    artifact_version: str
    outputs: dict[str, str]  # name -> sha256 of the bytes written

    def to_json(self) -> str:
        return canonical_json({
            "schema_version": SCHEMA_VERSION,
            "scenario": self.scenario,
            "config_hash": self.config_hash,
            "seed": self.seed,
            "artifact_version": self.artifact_version,
            "outputs": self.outputs,
        })


# ---------------------------------------------------------------------------
# Shared fixtures
# ---------------------------------------------------------------------------

VALIDITY_10Y = (identity.GENESIS, identity.GENESIS + 10 * identity.YEAR)
NOW = identity.GENESIS + identity.YEAR  # one year into every validity window


def synthesize_documents(kind: str, count: int, hierarchies: int, seed: int, *,
                         with_aa: bool = True, intermediates: int = 2):
    """Deterministic corpus of identity documents across several issuing
    hierarchies. Returns (trust_store, [documents])."""
    if kind == "card":
        store, hierarchy = identity.generate_ca_hierarchy(hierarchies, intermediates, seed)
        docs = []
        for i in range(count):
            issuer = hierarchy.issuers[i % len(hierarchy.issuers)]
            docs.append(identity.issue_identity_cert(
                hierarchy, issuer, f"Holder {i:06d}", f"UID-{seed}-{i:08d}", VALIDITY_10Y))
        return store, docs
    if kind == "epassport":
        store, hierarchy = identity.generate_ca_hierarchy(hierarchies, 0, seed)
        cscas = [hierarchy.authorities[name] for name in hierarchy.issuers]
        dscs = [identity.issue_dsc(csca, f"signer-{i}", VALIDITY_10Y)
                for i, csca in enumerate(cscas)]
        docs = []
        for i in range(count):
            c = i % len(cscas)
            holder = identity.HolderFields(
                name=f"HOLDER{i:06d}", document_number=f"P{i:07d}",
                nationality=f"N{c:02d}", birth_date="900101", sex="F",
                expiry_date="450101", issuing_state=f"N{c:02d}",
                personal_number=f"PN-{seed}-{i:08d}")
            docs.append(identity.issue_epassport(cscas[c], dscs[c], holder,
                                                 with_aa=with_aa, seed=seed + i))
        return store, docs
    _fail("params.kind", "must be one of ['card', 'epassport']")


def _doc_label(doc) -> str:
    if isinstance(doc, identity.EPassport):
        return doc.dg1.document_number
    return doc.certificate.subject_name


# ---------------------------------------------------------------------------
# Scenarios
# ---------------------------------------------------------------------------


def _scenario_identity_gen(p: _Params, seed: int) -> ScenarioResult:
    kind = p.text("kind", "epassport", {"card", "epassport"})
    count = p.integer("count", 5, lo=1, hi=100_000)
    hierarchies = p.integer("hierarchies", 3, lo=1, hi=64)
    with_aa = p.boolean("with_aa", True)
    p.reject_unknown()
    store, docs = synthesize_documents(kind, count, hierarchies, seed, with_aa=with_aa)
    rows = [{"index": i, "kind": kind, "label": _doc_label(d),
             "unique_id": identity.extract_unique_id(d),
             "document_hash": identity.document_hash(d).hex()}
            for i, d in enumerate(docs)]
    return ScenarioResult(
        columns=["index", "kind", "label", "unique_id", "document_hash"],
        rows=rows,
        summary={"documents": count, "hierarchies": hierarchies,
                 "trusted_roots": len(store.trusted_roots)})


def _scenario_identity_validate(p: _Params, seed: int) -> ScenarioResult:
    kind = p.text("kind", "epassport", {"card", "epassport"})
    count = p.integer("count", 5, lo=1, hi=100_000)
    hierarchies = p.integer("hierarchies", 3, lo=1, hi=64)
    p.reject_unknown()
    store, docs = synthesize_documents(kind, count, hierarchies, seed)
    rows = []
    for i, doc in enumerate(docs):
        if kind == "epassport":
            report = identity.validate_epassport(doc, store, NOW)
        else:
            report = identity.validate_chain(doc.chain.to_bytes(), store, NOW)
        rows.append({"index": i, "label": _doc_label(doc), "verdict": report.verdict,
                     "failure_code": report.failure_code.value if report.failure_code else ""})
    accepted = sum(1 for r in rows if r["verdict"] == "accepted")
    return ScenarioResult(
        columns=["index", "label", "verdict", "failure_code"], rows=rows,
        summary={"accepted": accepted, "rejected": len(rows) - accepted})


def _scenario_register_build(p: _Params, seed: int) -> ScenarioResult:
    kind = p.text("kind", "epassport", {"card", "epassport"})
    count = p.integer("count", 5, lo=1, hi=100_000)
    hierarchies = p.integer("hierarchies", 3, lo=1, hi=64)
    blockchain_id = p.text("blockchain_id", "chain-main")
    aa_mode = p.text("aa_mode", credential.AA_MODE_FULL,
                     {credential.AA_MODE_FULL, credential.AA_MODE_ABSENT})
    iterations = p.integer("kdf_iterations", 512, lo=1, hi=10_000_000)
    p.reject_unknown()
    with_aa = aa_mode == credential.AA_MODE_FULL or kind == "card"
    store, docs = synthesize_documents(kind, count, hierarchies, seed, with_aa=with_aa)
    rows = []
    for i, doc in enumerate(docs):
        bundle, _ = credential.build_registration_bundle(
            doc, f"passphrase-{seed}-{i}", blockchain_id, store, NOW,
            aa_mode=aa_mode, kdf_iterations=iterations)
        blob = bundle.to_bytes()
        rows.append({"index": i, "pseudonym": bundle.pseudonym.label(),
                     "aa_mode": bundle.evidence.aa_mode,
                     "bundle_sha256": hashlib.sha256(blob).hexdigest()})
    return ScenarioResult(
        columns=["index", "pseudonym", "aa_mode", "bundle_sha256"], rows=rows,
        summary={"bundles": len(rows), "blockchain_id": blockchain_id})


def _scenario_register_verify(p: _Params, seed: int) -> ScenarioResult:
    kind = p.text("kind", "epassport", {"card", "epassport"})
    count = p.integer("count", 5, lo=1, hi=100_000)
    hierarchies = p.integer("hierarchies", 3, lo=1, hi=64)
    blockchain_id = p.text("blockchain_id", "chain-main")
    iterations = p.integer("kdf_iterations", 512, lo=1, hi=10_000_000)
    p.reject_unknown()
    store, docs = synthesize_documents(kind, count, hierarchies, seed)
    rows = []
    for i, doc in enumerate(docs):
        bundle, _ = credential.build_registration_bundle(
            doc, f"passphrase-{seed}-{i}", blockchain_id, store, NOW,
            kdf_iterations=iterations)
        reparsed = credential.RegistrationBundle.from_bytes(bundle.to_bytes())
        verdict = credential.verify_registration_bundle(reparsed, store, blockchain_id, NOW)
        rows.append({"index": i, "pseudonym": bundle.pseudonym.label(),
                     "ok": verdict.accepted, "failed_step": verdict.failed_step or 0,
                     "reason": verdict.reason or ""})
    return ScenarioResult(
        columns=["index", "pseudonym", "ok", "failed_step", "reason"], rows=rows,
        summary={"verified": sum(1 for r in rows if r["ok"]), "total": len(rows)})


def _registry_round(p: _Params, seed: int, offline_count: int):
    kind = p.text("kind", "epassport", {"card", "epassport"})
    count = p.integer("count", 5, lo=1, hi=100_000)
    hierarchies = p.integer("hierarchies", 3, lo=1, hi=64)
    blockchain_id = p.text("blockchain_id", "chain-main")
    iterations = p.integer("kdf_iterations", 512, lo=1, hi=10_000_000)
    p.reject_unknown()
    store, docs = synthesize_documents(kind, count, hierarchies, seed)
    reg = registry.Registry(store, blockchain_id, seed=seed)
    client = attestation.EnclaveIdentity("zkpoi-wallet", 1)
    policy = attestation.AttestationPolicy.expecting(client, reg.enclave)
    session = reg.open_session(client, policy)
    bundles = []
    for i, doc in enumerate(docs):
        bundle, _ = credential.build_registration_bundle(
            doc, f"passphrase-{seed}-{i}", blockchain_id, store, NOW,
            kdf_iterations=iterations)
        reg.register(attestation.seal(session, bundle.to_bytes()), session, NOW)
        bundles.append((doc, f"passphrase-{seed}-{i}"))
    for doc, passphrase in bundles[:offline_count]:
        off, _ = credential.build_registration_bundle(
            doc, passphrase, blockchain_id, store, NOW,
            suffix=credential.SUFFIX_OFF, kdf_iterations=iterations)
        reg.take_offline(attestation.seal(session, off.to_bytes()), session, NOW)
    return reg


def _log_result(reg: registry.Registry) -> ScenarioResult:
    rows = [dict(record) for record in reg.log]
    return ScenarioResult(
        columns=["op", "pseudonym", "pk", "epoch"], rows=rows,
        summary={"epoch": reg.epoch, "online": reg.online_count()})


def _scenario_registry_register(p: _Params, seed: int) -> ScenarioResult:
    return _log_result(_registry_round(p, seed, offline_count=0))


def _scenario_registry_offline(p: _Params, seed: int) -> ScenarioResult:
    offline = p.integer("offline_count", 1, lo=0, hi=100_000)
    return _log_result(_registry_round(p, seed, offline_count=offline))


def _scenario_registry_dump(p: _Params, seed: int) -> ScenarioResult:
    reg = _registry_round(p, seed, offline_count=0)
    view = reg.host_view()
    result = _log_result(reg)
    result.summary.update({
        "accumulator_root": view["accumulator_root"],
        "identity_tags": len(view["id_tags"]),
    })
    result.default_format = "json"
    return result


def _scenario_sim_epoch(p: _Params, seed: int) -> ScenarioResult:
    n = p.integer("miners", 8, lo=1, hi=10_000)
    k = p.integer("shards", 2, lo=1, hi=256)
    quorum = p.integer("quorum", max(1, (n // k) * 2 // 3), lo=1)
    committee_min = p.integer("committee_min", 1, lo=1)
    tx_reward = p.number("tx_reward", 1.0, lo=0.0)
    block_reward = p.number("block_reward", 100.0, lo=0.0)
    fixed_cost = p.number("fixed_cost", 2.0, lo=0.0)
    per_tx_cost = p.number("per_tx_cost", 0.1, lo=0.0)
    penalty = p.number("penalty", 5.0, lo=0.0)
    txs = p.integer("txs_per_shard", 8, lo=0, hi=10_000)
    protocol = p.text("protocol", "both", {"coordinated", "receipts", "both"})
    lazy = p.integer("lazy_defectors", 0, lo=0)
    false_hash = p.integer("false_hash_reporters", 0, lo=0)
    ignorers = p.integer("instruction_ignorers", 0, lo=0)
    sample_size = p.integer("receipt_sample_size", 3, lo=0, hi=10_000)
    p.reject_unknown()
    try:
        params = shardgame.GameParams(k=k, n_miners=n, committee_min=committee_min,
                                      quorum=quorum, tx_reward=tx_reward,
                                      block_reward=block_reward, fixed_cost=fixed_cost,
                                      per_tx_cost=per_tx_cost, penalty=penalty)
    except ValueError as exc:
        _fail("params", str(exc))
    behaviors = {shardgame.BEHAVIOR_LAZY: lazy,
                 shardgame.BEHAVIOR_FALSE_HASH: false_hash,
                 shardgame.BEHAVIOR_IGNORER: ignorers}
    behaviors = {b: c for b, c in behaviors.items() if c}
    if sum(behaviors.values()) > n:
        _fail("params.lazy_defectors", "behavior counts exceed the miner count")
    randomness = seed.to_bytes(32, "big", signed=False) if seed >= 0 else (
        (seed + 2**64).to_bytes(32, "big"))
    rows = []
    protocols = ["coordinated", "receipts"] if protocol == "both" else [protocol]
    for name in protocols:
        miners = shardgame.make_miners(n, seed, behaviors)
        if name == "coordinated":
            outcome = shardgame.run_coordinated_protocol(
                params, miners, randomness, txs_per_shard=txs)
        else:
            outcome = shardgame.run_receipt_protocol(
                params, miners, randomness, txs_per_shard=txs,
                receipt_sample_size=sample_size)
        by_id = {m.miner_id: m for m in miners}
        for miner_id in sorted(outcome.payoffs):
            rows.append({"protocol": name, "miner": miner_id,
                         "behavior": by_id[miner_id].behavior,
                         "shard": by_id[miner_id].shard,
                         "payoff": outcome.payoffs[miner_id],
                         "classification": outcome.classification[miner_id]})
    return ScenarioResult(
        columns=["protocol", "miner", "behavior", "shard", "payoff", "classification"],
        rows=rows,
        summary={"miners": n, "shards": k, "protocols": protocols})


def _congestion_instance(p: _Params) -> cong.CongestionInstance:
    k = p.integer("puzzles", 2, lo=1, hi=16)
    n = p.integer("miners", 2, lo=0, hi=64)
    mu = p.number("mu", 1.0, lo=0.0)
    gamma = p.number("gamma", 0.0, lo=0.0)
    deadline = p.number("deadline", 1.0, lo=0.0, exclusive=True)
    return cong.CongestionInstance(k=k, n_miners=n, mu=mu, gamma=gamma, deadline=deadline)


def _scenario_econ_congestion(p: _Params, seed: int) -> ScenarioResult:
    instance = _congestion_instance(p)
    p.reject_unknown()
    solution = cong.solve_congestion_nash(instance)
    rows = []
    for k in range(instance.k):
        load = solution.allocation.loads[k][0]
        utility = (cong.miner_utility(instance, solution.allocation, k, 0)
                   if load else 0.0)
        rows.append({"puzzle": k, "load": load, "utility": utility})
    return ScenarioResult(
        columns=["puzzle", "load", "utility"], rows=rows,
        summary={"direction": solution.direction,
                 "potential": solution.potential_value,
                 "deviations_checked": len(solution.certificate),
                 "nash_certified": True})


def _scenario_econ_poa(p: _Params, seed: int) -> ScenarioResult:
    instance = _congestion_instance(p)
    zkpoi_cost = p.number("zkpoi_cost", 0.01, lo=0.0, exclusive=True)
    p.reject_unknown()
    nash = cong.all_nash_allocations(instance)
    worst = max(cong.total_mining_cost(instance, a) for a in nash)
    ratio = cong.price_of_crypto_anarchy(instance, zkpoi_cost=zkpoi_cost)
    rows = [{"nash_count": len(nash), "worst_nash_cost": worst,
             "zkpoi_cost": zkpoi_cost, "ratio": ratio}]
    return ScenarioResult(
        columns=["nash_count", "worst_nash_cost", "zkpoi_cost", "ratio"], rows=rows,
        summary={"ratio": ratio})


def _scenario_econ_dominance(p: _Params, seed: int) -> ScenarioResult:
    miner_count = p.integer("miner_count", 4, lo=2, hi=12)
    reward = p.number("reward", 4.0, lo=0.0)
    pow_cost = p.number("pow_cost", 1.5, lo=0.0)
    share_model = p.text("share_model", "zipf", {"zipf", "winner_take_all", "uniform"})
    population = p.integer("population", 10_000, lo=2)
    top_count = p.integer("top_count", 16, lo=1)
    top_share = p.number("top_share", 0.9, lo=0.0, hi=1.0, exclusive=True)
    udce_cost = p.number("udce_cost", 0.0, lo=0.0)
    p.reject_unknown()
    matrix = games.udce_vs_plfc_game(miner_count, pow_cost, reward,
                                     share_model=share_model, population=population,
                                     top_count=top_count, top_share=top_share,
                                     udce_cost=udce_cost)
    result = games.idsds(matrix)
    rows = [{"player": i, "surviving": "|".join(result.surviving[i])}
            for i in range(miner_count)]
    return ScenarioResult(
        columns=["player", "surviving"], rows=rows,
        summary={"unique_survivor": list(result.unique_survivor) if result.unique_survivor
                 else None,
                 "eliminations": len(result.trace),
                 "dominant_equilibrium": result.is_dominant_equilibrium,
                 "nash_verified": result.nash_verified})


def _scenario_econ_ess(p: _Params, seed: int) -> ScenarioResult:
    u_aa = p.number("u_aa", 3.0, None)
    u_ab = p.number("u_ab", 0.0, None)
    u_ba = p.number("u_ba", 2.0, None)
    u_bb = p.number("u_bb", 1.0, None)
    candidate = p.text("candidate", "A", {"A", "B"})
    p.reject_unknown()
    payoffs = {("A", "A"): u_aa, ("A", "B"): u_ab, ("B", "A"): u_ba, ("B", "B"): u_bb}
    verdict = games.is_ess(payoffs, ("A", "B"), candidate)
    rows = [{"candidate": candidate, "is_ess": verdict}]
    return ScenarioResult(columns=["candidate", "is_ess"], rows=rows,
                          summary={"is_ess": verdict})


def _scenario_econ_network(p: _Params, seed: int) -> ScenarioResult:
    m_a = p.number("m_a", 2.0, lo=0.0)
    m_b = p.number("m_b", 1.0, lo=0.0)
    c_a = p.number("c_a", 2.0, lo=0.0)
    c_b = p.number("c_b", 1.0, lo=0.0)
    lam = p.number("lam", 0.5, lo=0.0, hi=1.0, exclusive=True)
    alpha = p.number("alpha", 1.5, lo=0.0, exclusive=True)
    beta = p.number("beta", 1.5, lo=0.0, exclusive=True)
    steps = p.integer("steps", 2_000, lo=0, hi=10_000_000)
    stride = p.integer("stride", max(1, steps // 100), lo=1)
    mode = p.text("expectation_mode", "current", set(network.EXPECTATION_MODES))
    p.reject_unknown()
    if lam >= 1.0:
        _fail("params.lam", "must be < 1")
    state = network.NetworkState(m_a=m_a, m_b=m_b, c_a=c_a, c_b=c_b, lam=lam,
                                 alpha=alpha, beta=beta, expectation_mode=mode)
    path = network.simulate_network_growth(state, steps, seed)
    rows = []
    for t in range(0, steps + 1, stride):
        m_a_t, m_b_t, c_a_t, c_b_t = path[t]
        share = m_a_t / (m_a_t + m_b_t)
        rows.append({"t": t, "m_a": m_a_t, "m_b": m_b_t, "c_a": c_a_t, "c_b": c_b_t,
                     "merchant_share_a": share})
    return ScenarioResult(
        columns=["t", "m_a", "m_b", "c_a", "c_b", "merchant_share_a"], rows=rows,
        summary={"alpha_beta_product": alpha * beta,
                 "final_share_a": rows[-1]["merchant_share_a"]})


def _scenario_econ_circulation(p: _Params, seed: int) -> ScenarioResult:
    beta = p.number("beta_disc", 0.9, lo=0.0, hi=1.0, exclusive=True)
    eta = p.number("eta", 0.5, lo=0.0, hi=1.0, exclusive=True)
    alpha = p.number("alpha_eff", 0.5, lo=0.0)
    deltas = p.number_list("deltas", [round(0.1 * i, 1) for i in range(1, 10)],
                           lo=0.0, hi=1.0)
    p.reject_unknown()
    if beta >= 1.0:
        _fail("params.beta_disc", "must be < 1")
    if eta >= 1.0:
        _fail("params.eta", "must be < 1")
    rows = []
    for delta in deltas:
        if not 0.0 < delta <= 1.0:
            _fail("params.deltas", "entries must lie in (0, 1]")
        out = circ.stationary_dm_output(circ.CirculationParams(
            beta_disc=beta, eta=eta, alpha_eff=alpha, delta=delta))
        rows.append({"delta": delta, "q_star": out["q_star"],
                     "q_hat_full": out["q_hat_full"], "q_hat_delta": out["q_hat_delta"],
                     "pareto_dominates": out["pareto_dominates"]})
    return ScenarioResult(
        columns=["delta", "q_star", "q_hat_full", "q_hat_delta", "pareto_dominates"],
        rows=rows,
        summary={"beta_disc": beta, "eta": eta, "alpha_eff": alpha})


SCENARIOS = {
    "identity.gen": _scenario_identity_gen,
    "identity.validate": _scenario_identity_validate,
    "register.build": _scenario_register_build,
    "register.verify": _scenario_register_verify,
    "registry.register": _scenario_registry_register,
    "registry.offline": _scenario_registry_offline,
    "registry.dump": _scenario_registry_dump,
    "sim.epoch": _scenario_sim_epoch,
    "econ.congestion": _scenario_econ_congestion,
    "econ.poa": _scenario_econ_poa,
    "econ.dominance": _scenario_econ_dominance,
    "econ.ess": _scenario_econ_ess,
    "econ.network": _scenario_econ_network,
    "econ.circulation": _scenario_econ_circulation,
}


# ---------------------------------------------------------------------------
# Serialization and the run entry point
# ---------------------------------------------------------------------------


def _cell(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format(value, FLOAT_FORMAT)
    if value is None:
        return ""
    return str(value)


def render_csv(result: ScenarioResult) -> bytes:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(result.columns)
    for row in result.rows:
        writer.writerow([_cell(row.get(c)) for c in result.columns])
    return buf.getvalue().encode("utf-8")


def _jsonable(value):
    if isinstance(value, float):
        return float(format(value, FLOAT_FORMAT))
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    return value


def render_json(scenario: str, seed: int, result: ScenarioResult) -> bytes:
    doc = {
        "schema_version": SCHEMA_VERSION,
        "scenario": scenario,
        "seed": seed,
        "columns": result.columns,
        "rows": [_jsonable(row) for row in result.rows],
        "summary": _jsonable(result.summary),
    }
    return (canonical_json(doc) + "\n").encode("utf-8")


def run(config: dict, scenario: str, seed: int, out_path=None,
        output_format: str | None = None) -> tuple[RunManifest, bytes]:
    """Validate, execute, serialize, optionally write; returns the manifest
    and the serialized output bytes."""
    if scenario not in SCENARIOS:
        _fail("scenario", f"unknown scenario {scenario!r}; "
              f"known: {sorted(SCENARIOS)}")
    declared = config.get("scenario")
    if declared is not None and declared != scenario:
        _fail("scenario", f"config names {declared!r} but {scenario!r} was invoked")
    version = config.get("schema_version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        _fail("schema_version", f"unsupported schema version {version!r}")
    known_top = {"schema_version", "scenario", "seed", "params", "output"}
    for key in sorted(set(config) - known_top):
        _fail(key, "unknown config key")
    output_section = config.get("output", {})
    if not isinstance(output_section, dict):
        _fail("output", "must be a JSON object")
    for key in sorted(set(output_section) - {"format"}):
        _fail(f"output.{key}", "unknown output key")

    params = _Params(config.get("params", {}))
    result = SCENARIOS[scenario](params, seed)

    fmt = output_format or output_section.get("format") or result.default_format
    if fmt not in ("csv", "json"):
        _fail("output.format", "must be 'csv' or 'json'")
    payload = render_csv(result) if fmt == "csv" else render_json(scenario, seed, result)

    outputs = {}
    name = os.path.basename(str(out_path)) if out_path else f"{scenario}.{fmt}"
    outputs[name] = hashlib.sha256(payload).hexdigest()
    if out_path:
        try:
            with open(out_path, "wb") as fh:
                fh.write(payload)
        except OSError as exc:
            raise IoFailure(f"cannot write {out_path}: {exc}") from exc

    config_hash = hashlib.sha256(
        canonical_json({k: config[k] for k in sorted(set(config) & known_top)})
        .encode("utf-8")).hexdigest()
    manifest = RunManifest(scenario=scenario, config_hash=config_hash, seed=seed,
                           artifact_version=__version__, outputs=outputs)
    return manifest, payload
