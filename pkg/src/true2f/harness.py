"""Scenario engine: wires tokens, browsers and relying parties together.

Every entry point takes a ``seed`` and returns a JSON-serializable report;
the same seed gives the same report.
"""

import copy
import math
import random
import warnings
from collections import Counter

from . import adversary, group, instrument, sync, token as token_mod, vif, wire
from .browser import Browser
from .counter import CounterStore
from .errors import TokenDisabled, TokenFailure
from .relying_party import RelyingParty, Verdict, fingerprint_probe

SCENARIOS = (
    "honest",
    "fixed-nonce",
    "wrong-nonce",
    "biased-keygen",
    "wrong-pk",
    "counter-desync",
    "global-counter",
    "selective-abort",
    "clone",
    "fingerprint",
)


class Deployment:
    """One token, its browser and a set of relying parties."""

    def __init__(self, seed=0, variant="honest", n_origins=1, token_kwargs=None):
        self.rng = random.Random(seed)
        cls = adversary.VARIANTS[variant]
        self.token = cls(rng=random.Random(self.rng.getrandbits(64)), **(token_kwargs or {}))
        self.channel = token_mod.Channel(self.token)
        counter = self.token.counter_factory()
        self.browser = Browser(self.channel, rng=random.Random(self.rng.getrandbits(64)), counter=counter)
        self.sites = [
            RelyingParty(f"https://site{i}.example", random.Random(self.rng.getrandbits(64)))
            for i in range(n_origins)
        ]
        self.accounts = []

    def initialize(self):
        return self.browser.initialize()

    def register(self, rp):
        challenge = rp.new_challenge()
        result = self.browser.register(rp.origin, rp.chal(challenge))
        record = rp.rp_register(result.response.to_bytes(), challenge)
        self.accounts.append((rp, record))
        return record

    def authenticate(self, rp, record):
        challenge = rp.new_challenge()
        result = self.browser.authenticate(rp.origin, rp.chal(challenge), record.key_handle)
        return rp.rp_authenticate(record, result.response.to_bytes(), challenge), result.counter


def _outcome_counts():
    return Counter({v.value: 0 for v in Verdict} | {"abort": 0, "disabled": 0})


def run_requests(dep, n_requests, report):
    """Round-robin authentications over the registered accounts."""
    outcomes = report["outcomes"]
    for i in range(n_requests):
        rp, record = dep.accounts[i % len(dep.accounts)]
        before = dep.channel.bytes_to_token
        try:
            with instrument.counting() as ops:
                verdict, n = dep.authenticate(rp, record)
            outcomes[verdict.value] += 1
            report["token_exp_per_auth"][ops["token", "exp"]] += 1
            report["counter_trace"].append([rp.origin, n])
        except TokenFailure as exc:
            outcomes["abort"] += 1
            report["aborts"].append({"request": i, "reason": exc.reason})
        except TokenDisabled:
            outcomes["disabled"] += 1
            report["bytes_after_abort"] += dep.channel.bytes_to_token - before


def _new_report(name, seed, variant):
    return {
        "scenario": name,
        "seed": seed,
        "variant": variant,
        "initialized": False,
        "registered": 0,
        "outcomes": _outcome_counts(),
        "aborts": [],
        "bytes_after_abort": 0,
        "token_exp_per_auth": Counter(),
        "counter_trace": [],
    }


def _finish(report):
    report["outcomes"] = dict(report["outcomes"])
    report["token_exp_per_auth"] = {str(k): v for k, v in sorted(report["token_exp_per_auth"].items())}
    return report


def run_protocol_scenario(name="honest", seed=0, n_origins=2, n_requests=100, token_kwargs=None, taint=True):
    variant = name
    dep = Deployment(seed, variant, n_origins, token_kwargs)
    report = _new_report(name, seed, variant)
    try:
        dep.initialize()
        report["initialized"] = True
        for rp in dep.sites:
            dep.register(rp)
            report["registered"] += 1
    except TokenFailure as exc:
        report["aborts"].append({"request": "setup", "reason": exc.reason})
        report["outcomes"]["abort"] += 1
    if dep.accounts:
        run_requests(dep, n_requests, report)
    else:
        for _ in range(n_requests):
            before = dep.channel.bytes_to_token
            try:
                dep.register(dep.sites[0])
            except TokenDisabled:
                report["outcomes"]["disabled"] += 1
                report["bytes_after_abort"] += dep.channel.bytes_to_token - before
    report["token_failed"] = dep.browser.token_failed
    if taint and variant == "honest":
        report["taint"] = taint_check(dep)
    return _finish(report)


def run_selective_abort(seed=0, interactions=7):
    rng = random.Random(seed)
    secret = rng.randrange(interactions + 1)
    dep = Deployment(seed, "selective-abort", 1, {"secret": secret, "interactions": interactions})
    report = _new_report("selective-abort", seed, "selective-abort")
    dep.initialize()
    dep.register(dep.sites[0])
    report["initialized"] = True
    report["registered"] = 1
    run_requests(dep, interactions, report)
    abort_at = report["aborts"][0]["request"] + 1 if report["aborts"] else 0
    report.update(
        interactions=interactions,
        leak_bound_bits=math.log2(interactions + 1),
        secret=secret,
        observed_abort_position=abort_at,
        recovered_secret=abort_at,
        token_failed=dep.browser.token_failed,
    )
    return _finish(report)


# --- counter privacy scenarios ------------------------------------------------


def run_clone_scenario(seed=0, mode="per-identity"):
    """Clone at S1, owner at S2, clone at S2, owner at S1."""
    variant = "global-counter" if mode == "global" else "honest"
    owner = Deployment(seed, variant, 2)
    owner.initialize()
    s1, s2 = owner.sites
    r1, r2 = owner.register(s1), owner.register(s2)
    for rp, rec in ((s1, r1), (s2, r2)):
        owner.authenticate(rp, rec)
    clone = copy.deepcopy(owner.browser)
    script = [("clone", s1, r1), ("owner", s2, r2), ("clone", s2, r2), ("owner", s1, r1)]
    steps = []
    for who, rp, rec in script:
        browser = clone if who == "clone" else owner.browser
        challenge = rp.new_challenge()
        res = browser.authenticate(rp.origin, rp.chal(challenge), rec.key_handle)
        verdict = rp.rp_authenticate(rec, res.response.to_bytes(), challenge)
        steps.append({"who": who, "site": rp.origin, "counter": res.counter, "verdict": verdict.value})
    return {
        "scenario": "clone",
        "seed": seed,
        "mode": mode,
        "steps": steps,
        "clone_detected": {s1.origin: r1.clone_flag, s2.origin: r2.clone_flag},
    }


def _site_sequence(rng, n_auths, n_sites):
    return [rng.randrange(n_sites) for _ in range(n_auths)]


def run_fingerprint_scenario(seed=0, n_auths=1000, n_sites=2):
    """Linkage rate for a global counter, per-identity counters, and independent tokens."""
    rng = random.Random(seed)
    sequence = _site_sequence(rng, n_auths, n_sites)
    rates = {}
    for mode in ("global", "per-identity"):
        dep = Deployment(seed, "global-counter" if mode == "global" else "honest", n_sites)
        dep.initialize()
        records = [dep.register(rp) for rp in dep.sites]
        obs = []
        for s in sequence:
            verdict, n = dep.authenticate(dep.sites[s], records[s])
            obs.append((s, n))
        rates[mode] = fingerprint_probe(obs)
    tokens = [CounterStore.create() for _ in range(n_sites)]
    rates["independent"] = fingerprint_probe((s, tokens[s].inc(b"site")) for s in sequence)
    rates["single-site"] = fingerprint_probe((0, i + 1) for i in range(n_auths))
    return {"scenario": "fingerprint", "seed": seed, "auths": n_auths, "sites": n_sites, "linkage_rate": rates}


def run_scenario(name, seed=0, **params):
    if name == "selective-abort":
        return run_selective_abort(seed, **params)
    if name == "clone":
        return run_clone_scenario(seed, **params)
    if name == "fingerprint":
        return run_fingerprint_scenario(seed, **params)
    if name in adversary.VARIANTS:
        return run_protocol_scenario(name, seed, **params)
    raise ValueError(f"unknown scenario {name!r}; choose from {', '.join(SCENARIOS)}")


# --- channel taint check ------------------------------------------------------


def taint_check(dep):
    """Audit an honest run's channel log against the token's secrets.

    Every frame must re-encode to itself, no secret may appear anywhere in
    the byte log, and each token-produced field other than fresh keygen shares
    must equal a value recomputed from public data.
    """
    tok = dep.token
    secrets = {
        "x": group.scalar_to_bytes(tok.msk.x),
        "skVRF": group.scalar_to_bytes(tok.msk.vrf.sk),
        "mac_key": tok.mac_key,
    }
    violations = []
    frames = [(d, raw, wire.decode_frame(raw)) for d, raw in dep.channel.log]
    for d, raw, msg in frames:
        if msg.to_bytes() != raw:
            violations.append(f"{type(msg).__name__} does not re-encode to the same bytes")
        if isinstance(msg, wire.AuthRequest):
            secrets[f"sk_id:{msg.ident.hex()[:8]}"] = group.scalar_to_bytes(tok.msk.x * msg.y)
    blob = b"".join(raw for _, raw, _ in frames)
    for name, secret in secrets.items():
        if secret in blob:
            violations.append(f"secret {name} appears on the channel")

    allowed = (wire.KeygenShare, wire.KeygenDone, wire.RegisterResponse, wire.SignShare, wire.SignatureMsg)
    counters = Counter()
    request = None
    for d, raw, msg in frames:
        if d == "to_token":
            request = msg
            continue
        if not isinstance(msg, allowed):
            violations.append(f"token sent unexpected {type(msg).__name__}")
        elif isinstance(msg, wire.RegisterResponse):
            y = msg.proof.y
            if msg.pk != group.scalar_mult(dep.browser.mpk.X, y):
                violations.append("registration pk is not X^y")
            if msg.tag != token_mod.mac(tok.mac_key, request.ident, y):
                violations.append("registration tag is not the MAC of (id, y)")
            if not vif.vif_verify(dep.browser.mpk, request.ident, msg.pk, msg.proof):
                violations.append("registration proof does not verify")
        elif isinstance(msg, wire.SignShare) and isinstance(request, wire.AuthRequest):
            auth = request
            counters[auth.app + auth.ident] += 1
        elif isinstance(msg, wire.SignatureMsg):
            n = counters[auth.app + auth.ident]
            m = wire.signed_message(auth.presence, auth.app, auth.chal, auth.ident, n)
            pk = group.scalar_mult(dep.browser.mpk.X, auth.y)
            if not group.ecdsa_verify(pk, m, msg.sig):
                violations.append("signature does not verify under the identity key")
            else:
                R = share + group.base_mult(request.v)
                if group.recover_r_abs(pk, m, msg.sig) not in (R, -R):
                    violations.append("signature nonce is not the agreed one")
        if isinstance(msg, wire.SignShare):
            share = msg.point
    return {"frames": len(frames), "violations": violations}


# --- statistics ---------------------------------------------------------------


def collect_stats(seed=0, n_cycles=10, n_origins=2):
    """Operation counts and message sizes for honest register and auth flows."""
    dep = Deployment(seed, "honest", n_origins)
    with instrument.counting() as init_ops:
        dep.initialize()
    reg_ops, auth_ops = Counter(), Counter()
    sizes = Counter()
    for i in range(n_cycles):
        rp = dep.sites[i % n_origins]
        with instrument.counting() as ops:
            record = dep.register(rp)
        reg_ops.update(ops)
        with instrument.counting() as ops:
            dep.authenticate(rp, record)
        auth_ops.update(ops)
    for _, raw in dep.channel.log:
        sizes[type(wire.decode_frame(raw)).__name__] = len(raw)
    per = lambda c, n: {f"{who}.{op}": v / n for (who, op), v in sorted(c.items())}
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        blob = sync.export_state(dep.browser)
    return {
        "seed": seed,
        "cycles": n_cycles,
        "ops_init": per(init_ops, 1),
        "ops_per_registration": per(reg_ops, n_cycles),
        "ops_per_authentication": per(auth_ops, n_cycles),
        "frame_bytes": dict(sorted(sizes.items())),
        "sync_state_bytes": len(blob),
        "sync_state_bound": sync.size_bound(len(dep.browser.records)),
    }
