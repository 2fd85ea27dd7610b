"""Smoke test for the newsduel extension module.

Build and install it first:  pip install --no-build-isolation ./crates/py
"""

import json
import sys
import tempfile
from pathlib import Path

import newsduel


def check(cond, what):
    if not cond:
        print(f"FAIL {what}")
        sys.exit(1)
    print(f"ok   {what}")


def main():
    config = json.loads(newsduel.default_config_json())
    check(config["rounds_total"] == 4 and len(config["personas"]) == 5, "bundled config")

    prompt = newsduel.system_prompt()
    check(prompt.startswith("# 1. Story Context") and "Alex Smith" in prompt, "system prompt")

    check(newsduel.winner([6, 6, 6, 6, 6], 100, 100) == "player1", "winner above the midpoint")
    check(newsduel.winner([5, 5, 5, 5, 5], 90, 110) == "player2", "midpoint goes to the richer player")
    check(newsduel.winner([5, 5, 5, 5, 5], 100, 100) == "draw", "midpoint with equal currency draws")

    n, w_plus, w_minus, z, p, method = newsduel.wilcoxon([1, 2, 3, 4, 5, 6, 7, 8], [2, 3, 4, 5, 6, 7, 8, 9])
    check(n == 8 and w_minus == 0 and method == "exact" and abs(p - 2 / 256) < 1e-12, "exact wilcoxon")

    text = newsduel.render_opinion([1, 2, 3, 4, 5], ["a", "b", "c", "d", "e\nf"])
    parsed = newsduel.parse_opinion(text)
    check([t for _, t, _ in parsed] == [1, 2, 3, 4, 5] and parsed[4][2] == "e\nf", "opinion round trip")

    game = newsduel.Game()
    check(game.actor == "influencer" and game.currency == (100, 100), "fresh game")
    hint = game.purchase_hint("influencer", "r1-influencer-simple")
    check(len(hint) > 0 and game.currency == (90, 100), "hint purchase")
    try:
        game.publish("debunker", "me first")
        check(False, "out-of-turn publish rejected")
    except ValueError:
        check(True, "out-of-turn publish rejected")
    trusts = game.publish("influencer", "Families are dying. Protect your children.")
    check(all(t > 5 for t in trusts), "emotional message raises trust")
    game.publish("debunker", "The published evidence shows no benefit.")
    check(game.round == 2, "round advances")

    with tempfile.TemporaryDirectory() as d:
        winner, total, log = newsduel.simulate(d, seed=3)
        check(winner == "player1" and Path(log).exists(), "simulation writes a log")
        snap = json.loads(newsduel.replay_log(log))
        check(snap["outcome"]["winner"] == winner and snap["outcome"]["final_trust_sum"] == total, "replay")
        try:
            newsduel.analyze(str(Path(d) / "missing.csv"), str(Path(d) / "r.md"))
            check(False, "missing analysis input raises")
        except OSError:
            check(True, "missing analysis input raises")

    print("smoke test passed")


if __name__ == "__main__":
    main()
