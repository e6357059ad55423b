"""Command-line front end. Every command prints one report (JSON or text)."""

import argparse
import json
import os
import pickle
import random
import sys

from . import harness
from .counter import CounterStore
from .crash import run_crash_campaign
from .flash import CRASH_MODELS, ERASE_BUDGET, FlashSim


def _emit(report, fmt):
    if fmt == "json":
        print(json.dumps(report, indent=2, sort_keys=True))
        return
    for key, value in report.items():
        if isinstance(value, (dict, list)):
            value = json.dumps(value, sort_keys=True)
        print(f"{key}: {value}")


def _load(path):
    with open(path, "rb") as fh:
        return pickle.load(fh)


def _save(path, dep):
    with open(path, "wb") as fh:
        pickle.dump(dep, fh)


def _dump_flash(args, flash):
    if args.flash_image and flash is not None:
        with open(args.flash_image, "wb") as fh:
            fh.write(flash.to_bytes())


def _token_flash(dep):
    counter = dep.token.counter
    return getattr(counter, "flash", None)


def cmd_init(args):
    seed = args.seed if args.seed is not None else int.from_bytes(os.urandom(8), "big")
    dep = harness.Deployment(seed, args.variant, n_origins=0)
    mpk = dep.initialize()
    _save(args.state, dep)
    _dump_flash(args, _token_flash(dep))
    return {"command": "init", "seed": seed, "variant": args.variant, "mpk": mpk.to_bytes().hex()}


def _site(dep, origin):
    for rp in dep.sites:
        if rp.origin == origin:
            return rp
    rp = harness.RelyingParty(origin, random.Random(dep.rng.getrandbits(64)))
    dep.sites.append(rp)
    return rp


def cmd_register(args):
    dep = _load(args.state)
    record = dep.register(_site(dep, args.origin))
    _save(args.state, dep)
    return {"command": "register", "origin": args.origin, "key_handle": record.key_handle.hex(),
            "pk": record.pk.to_bytes().hex(), "registrations": dep.browser.registration_count}


def cmd_auth(args):
    dep = _load(args.state)
    rp = _site(dep, args.origin)
    matches = [rec for site, rec in dep.accounts if site is rp]
    if args.key_handle:
        matches = [rec for rec in matches if rec.key_handle.hex() == args.key_handle]
    if not matches:
        raise SystemExit(f"no account registered at {args.origin}")
    verdict, counter = dep.authenticate(rp, matches[-1])
    _save(args.state, dep)
    _dump_flash(args, _token_flash(dep))
    return {"command": "auth", "origin": args.origin, "verdict": verdict.value, "counter": counter}


def cmd_scenario(args):
    params = {}
    if args.name in ("fingerprint",):
        params["n_auths"] = args.requests
    elif args.name == "clone":
        params["mode"] = args.mode
    elif args.name != "selective-abort":
        params["n_requests"] = args.requests
    return harness.run_scenario(args.name, args.seed or 0, **params)


def cmd_crash_campaign(args):
    models = args.models.split(",")
    results = run_crash_campaign(args.ops, args.ids, models, args.seed or 0)
    return {"command": "crash-campaign", "ops": args.ops, "ids": args.ids,
            "results": [r.as_dict() for r in results],
            "violations": sum(len(r.violations) for r in results)}


def cmd_capacity(args):
    if args.flash_image and os.path.exists(args.flash_image):
        with open(args.flash_image, "rb") as fh:
            flash = FlashSim.from_bytes(fh.read(), erase_budget=args.erase_budget)
        st = CounterStore.recover(flash)
        source = args.flash_image
    else:
        st = CounterStore.create(erase_budget=args.erase_budget)
        source = "fresh"
    return {"command": "capacity", "source": source, "erase_budget": args.erase_budget, **st.capacity_report()}


def cmd_stats(args):
    return harness.collect_stats(args.seed or 0, n_cycles=args.cycles)


def build_parser():
    parser = argparse.ArgumentParser(prog="true2f", description=__doc__)
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--format", choices=("json", "text"), default="json")
    parser.add_argument("--flash-image", metavar="PATH", help="write (or read, for capacity) the token flash image")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("init", help="initialize a token and browser pair")
    p.add_argument("--state", default="true2f-state.pkl")
    p.add_argument("--variant", default="honest", choices=sorted(harness.adversary.VARIANTS))
    p.set_defaults(func=cmd_init)

    p = sub.add_parser("register", help="register at an origin")
    p.add_argument("--state", default="true2f-state.pkl")
    p.add_argument("--origin", required=True)
    p.set_defaults(func=cmd_register)

    p = sub.add_parser("auth", help="authenticate at an origin")
    p.add_argument("--state", default="true2f-state.pkl")
    p.add_argument("--origin", required=True)
    p.add_argument("--key-handle", help="hex key handle (default: latest at the origin)")
    p.set_defaults(func=cmd_auth)

    p = sub.add_parser("scenario", help="run a named scenario")
    p.add_argument("name", choices=harness.SCENARIOS)
    p.add_argument("--requests", type=int, default=100)
    p.add_argument("--mode", choices=("per-identity", "global"), default="per-identity")
    p.set_defaults(func=cmd_scenario)

    p = sub.add_parser("crash-campaign", help="power-loss sweep over a counter trace")
    p.add_argument("--ops", type=int, default=500)
    p.add_argument("--ids", type=int, default=120)
    p.add_argument("--models", default=",".join(CRASH_MODELS))
    p.set_defaults(func=cmd_crash_campaign)

    p = sub.add_parser("capacity", help="remaining increments for a counter store")
    p.add_argument("--erase-budget", type=int, default=ERASE_BUDGET)
    p.set_defaults(func=cmd_capacity)

    p = sub.add_parser("stats", help="operation counts and message sizes")
    p.add_argument("--cycles", type=int, default=10)
    p.set_defaults(func=cmd_stats)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    _emit(args.func(args), args.format)
    return 0


if __name__ == "__main__":
    sys.exit(main())
