import json

import pytest

from true2f import cli
from true2f.flash import FlashSim


def _run(capsys, *argv):
    assert cli.main(list(argv)) == 0
    return json.loads(capsys.readouterr().out)


def test_session(tmp_path, capsys):
    state, image = str(tmp_path / "s.pkl"), str(tmp_path / "flash.bin")
    out = _run(capsys, "--seed", "3", "--flash-image", image, "init", "--state", state)
    assert len(bytes.fromhex(out["mpk"])) == 66
    reg = _run(capsys, "register", "--state", state, "--origin", "https://a.example")
    assert reg["registrations"] == 1
    for n in (1, 2):
        auth = _run(capsys, "--flash-image", image, "auth", "--state", state, "--origin", "https://a.example",
                    "--key-handle", reg["key_handle"])
        assert (auth["verdict"], auth["counter"]) == ("Accept", n)
    FlashSim.from_bytes(open(image, "rb").read())
    cap = _run(capsys, "--flash-image", image, "capacity")
    assert cap["source"] == image and cap["worst_case_remaining"] == 6_400_000


def test_auth_without_account(tmp_path, capsys):
    state = str(tmp_path / "s.pkl")
    _run(capsys, "--seed", "1", "init", "--state", state)
    with pytest.raises(SystemExit):
        cli.main(["auth", "--state", state, "--origin", "https://none.example"])


def test_scenario_text_format(capsys):
    assert cli.main(["--seed", "2", "--format", "text", "scenario", "fixed-nonce", "--requests", "3"]) == 0
    out = capsys.readouterr().out
    assert "scenario: fixed-nonce" in out and "bytes_after_abort: 0" in out


def test_capacity_fresh_and_campaign(capsys):
    assert _run(capsys, "capacity", "--erase-budget", "50")["worst_case_remaining"] == 50 * 128
    rep = _run(capsys, "crash-campaign", "--ops", "20", "--ids", "4", "--models", "zeros")
    assert rep["violations"] == 0 and len(rep["results"]) == 1


def test_bad_subcommand():
    with pytest.raises(SystemExit):
        cli.main(["fly"])
