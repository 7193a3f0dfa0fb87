"""How far does a retry budget get you against a flaky annotator?

Simulates a provider whose replies are malformed with probability p and
measures the fraction of items that still end up annotated for retry
budgets 0..3, next to the closed-form expectation 1 - p^(budget+1).

    python3 scripts/retry_experiment.py [--trials 60] [--seed 7]
"""

import argparse
import json
import random
import sys

from sandpiper.config import AppConfig
from sandpiper.model import RunParams
from sandpiper.service import Service

SCHEMA = {
    "name": "codes",
    "fields": [
        {"name": "code", "type": "enum",
         "values": ["question", "explanation", "other"]},
    ],
}

GOOD = json.dumps({"code": "question"})
BAD_REPLIES = [
    json.dumps({"code": "musing"}),        # enum violation
    '{"code": "question"',                  # truncated JSON
    "Sure! The code here is question.",     # prose, no document
    json.dumps({"kode": "question"}),       # wrong field name
]


def run_cell(rng, p, budget, trials):
    service = Service(AppConfig(db_path=":memory:"))
    service.ingest(b"a: what is a closure\n", "plaintext", "probe")
    session_id = service.store.query("sessions")[0]["id"]
    prompt = service.create_prompt("codes", "Code the utterance.", SCHEMA)

    ok = 0
    for _ in range(trials):
        script = [rng.choice(BAD_REPLIES) if rng.random() < p else GOOD
                  for _ in range(budget + 1)]
        run = service.create_run(prompt["id"], 1, "mock", [session_id],
                                 params=RunParams(max_retries=budget),
                                 mock_script=script)
        final = service.execute_run_sync(run["id"])
        ok += final["counts"]["succeeded"]
    return ok / trials


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--trials", type=int, default=60, help="runs per cell")
    ap.add_argument("--seed", type=int, default=7)
    args = ap.parse_args(argv)
    rng = random.Random(args.seed)

    budgets = range(4)
    print(f"{'p(bad)':>8}" + "".join(f"  retries={b}" for b in budgets))
    for p in (0.2, 0.5, 0.8):
        cells = []
        for budget in budgets:
            observed = run_cell(rng, p, budget, args.trials)
            expected = 1 - p ** (budget + 1)
            cells.append(f"{observed:.2f}/{expected:.2f}")
        print(f"{p:>8.1f}" + "".join(f"  {c:>9}" for c in cells))
    print("\ncells are observed/expected item success rates")
    return 0


if __name__ == "__main__":
    sys.exit(main())
