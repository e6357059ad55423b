import random
import warnings

import pytest

from true2f import group, harness, wire
from true2f.browser import Browser
from true2f.errors import TokenDisabled, TokenFailure, UnknownIdentity
from true2f.relying_party import Verdict
from true2f.token import Channel, Token


def test_register_and_authenticate(deployment):
    for rp, record in deployment.accounts:
        verdict, n = deployment.authenticate(rp, record)
        assert verdict is Verdict.ACCEPT and n == 1
        verdict, n = deployment.authenticate(rp, record)
        assert n == 2


def test_browser_counter_tracks_token(deployment):
    rp, record = deployment.accounts[0]
    for _ in range(5):
        deployment.authenticate(rp, record)
    key = rp.app_hash + record.key_handle
    assert deployment.browser.counter.value(key) == deployment.token.counter.value(key) == 5


def test_unknown_key_handle(deployment):
    rp = deployment.sites[0]
    with pytest.raises(UnknownIdentity):
        deployment.browser.authenticate(rp.origin, bytes(32), b"\x00" * 32)


def test_failure_disables_token(deployment):
    rp, record = deployment.accounts[0]
    deployment.token.mac_key = bytes(32)  # token forgets its key: every auth now errors
    with pytest.raises(TokenFailure) as exc:
        deployment.authenticate(rp, record)
    assert exc.value.reason == "UnexpectedReply"
    before = deployment.channel.bytes_to_token
    for _ in range(5):
        with pytest.raises(TokenDisabled):
            deployment.authenticate(rp, record)
        with pytest.raises(TokenDisabled):
            deployment.register(rp)
    assert deployment.channel.bytes_to_token == before


def test_registration_warning():
    dep = harness.Deployment(seed=3, n_origins=1)
    dep.browser.warn_at = 3
    dep.initialize()
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        for _ in range(4):
            dep.register(dep.sites[0])
    assert [w.category for w in caught] == [RuntimeWarning]


def test_attestation_verifies(deployment):
    rp = deployment.sites[0]
    challenge = rp.new_challenge()
    res = deployment.browser.register(rp.origin, rp.chal(challenge))
    assert res.response.cert.self_signed_ok()
    assert group.ecdsa_verify(res.pk_att, rp.app_hash + rp.chal(challenge), res.sig_att)


def test_presence_flag(deployment):
    rp, record = deployment.accounts[0]
    challenge = rp.new_challenge()
    res = deployment.browser.authenticate(rp.origin, rp.chal(challenge), record.key_handle, require_presence=False)
    assert res.response.presence == 0
    assert rp.rp_authenticate(record, res.response.to_bytes(), challenge) is Verdict.REJECT_SIG
    assert rp.rp_authenticate(record, res.response.to_bytes(), challenge, require_presence=False) is Verdict.ACCEPT
