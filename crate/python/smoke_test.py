"""Smoke test for the `poq` Python extension.

Build and install it first:

    pip install --no-build-isolation ./crates/py

Pass the path of a built `poq` binary to also check that keys and
responses match the command line byte for byte.
"""

import subprocess
import sys
import tempfile
from pathlib import Path

import poq


def check(cond, what):
    print(("ok   " if cond else "FAIL ") + what)
    if not cond:
        sys.exit(1)


def main():
    desk = poq.Params()
    check(desk.log_q == 35 and desk.m == 38 and desk.w == 2240, "desk parameters")
    check(desk.hellinger_bound <= 0.02, "distance bound below 1/50")
    check(poq.Params.from_text(desk.to_text()).to_text() == desk.to_text(), "parameter text round trip")
    try:
        poq.Params(n=3)
        check(False, "bad dimension rejected")
    except ValueError as e:
        check("power of two" in str(e), "bad dimension rejected")

    small = poq.Params(n=16, lambda_=40)
    public, secret = poq.keygen(small, seed=1)
    msg = poq.challenge(public)
    accepted, count = poq.verify(secret, poq.respond(msg, "honest", secret, seed=1))
    check(accepted and 4 * count > 3 * 40, f"honest response accepted ({count}/40)")
    accepted, count = poq.verify(secret, poq.respond(msg, "random_guess", seed=2))
    check(not accepted, f"random guess rejected ({count}/40)")
    try:
        poq.verify(secret, msg)
        check(False, "challenge is not a response")
    except ValueError:
        check(True, "challenge is not a response")

    stats = poq.experiment(small, "half_claw", trials=3, seed=5, variants=[1, 2, 3])
    check([s["variant"] for s in stats] == [1, 2, 3], "experiment returns one record per variant")
    check(stats[1]["db_hit_profile"] == [0, 120, 0], "half_claw has one table preimage per tuple")

    check(abs(poq.correct_m_probability(2.0, 1.0) - 0.9) < 1e-12, "amplitude formula")
    check(poq.microsim_violation(8, 3, [True, False] * 4) < 1e-12, "toy circuit satisfies the check")

    if len(sys.argv) > 1:
        cli = str(Path(sys.argv[1]).resolve())
        with tempfile.TemporaryDirectory() as d:
            run = lambda *a: subprocess.run([cli, *a], cwd=d, check=True, capture_output=True)
            run("keygen", "--public", "k.pub", "--secret", "k.sec", "--n", "16", "--lambda", "40", "--seed", "1")
            check(Path(d, "k.pub").read_bytes() == public, "public key matches the command line")
            check(Path(d, "k.sec").read_bytes() == secret, "secret key matches the command line")
            run("challenge", "--public", "k.pub", "--out", "c.bin")
            run("prove", "--challenge", "c.bin", "--out", "r.bin", "--secret", "k.sec", "--seed", "1")
            check(
                Path(d, "r.bin").read_bytes() == poq.respond(msg, "honest", secret, seed=1),
                "response matches the command line",
            )
    print("smoke test passed")


if __name__ == "__main__":
    main()
