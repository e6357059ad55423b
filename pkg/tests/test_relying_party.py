import dataclasses

import pytest

from true2f import group, wire
from true2f.errors import InvalidSignature
from true2f.relying_party import RelyingParty, Verdict, fingerprint_probe


def _auth_response(deployment):
    rp, record = deployment.accounts[0]
    challenge = rp.new_challenge()
    res = deployment.browser.authenticate(rp.origin, rp.chal(challenge), record.key_handle)
    return rp, record, challenge, res.response


def test_replayed_counter_flags_clone(deployment):
    rp, record, challenge, resp = _auth_response(deployment)
    assert rp.rp_authenticate(record, resp.to_bytes(), challenge) is Verdict.ACCEPT
    assert rp.rp_authenticate(record, resp.to_bytes(), challenge) is Verdict.REJECT_COUNTER
    assert record.clone_flag


def test_wrong_challenge_rejected(deployment):
    rp, record, challenge, resp = _auth_response(deployment)
    assert rp.rp_authenticate(record, resp.to_bytes(), rp.new_challenge()) is Verdict.REJECT_SIG
    assert rp.rp_authenticate(record, b"\x01\x00", challenge) is Verdict.REJECT_SIG
    assert not record.clone_flag


def test_register_checks_attestation(deployment):
    rp = deployment.sites[0]
    challenge = rp.new_challenge()
    res = deployment.browser.register(rp.origin, rp.chal(challenge))
    bad = dataclasses.replace(res.response, sig=group.flip(res.response.sig))
    rp.rp_register(bad.to_bytes(), challenge)  # flipped signature is still valid
    with pytest.raises(InvalidSignature):
        rp.rp_register(res.response.to_bytes(), rp.new_challenge())


def test_fingerprint_probe():
    assert fingerprint_probe([(0, 1), (1, 2), (0, 3), (1, 4)]) == 1.0
    assert fingerprint_probe([(0, 1), (1, 1), (0, 2), (1, 2)]) == 0.0
    assert fingerprint_probe([(0, 1), (0, 2), (0, 3)]) is None
    assert fingerprint_probe([(0, 1), (0, 2), (0, 3), (1, 1)]) == 0.0
