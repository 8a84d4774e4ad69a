#!/usr/bin/env python3
"""Minimal stdio evaluator used to exercise the protocol client.

Objective: mean of the scaling values on active slots (0.0 when nothing is
active). Flags: --fail-at N makes request N return an error response;
--hang-at N makes the process stop responding at request N; --bad-handshake
emits a wrong protocol name.
"""

import argparse
import json
import sys


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--fail-at", type=int, default=None)
    parser.add_argument("--hang-at", type=int, default=None)
    parser.add_argument("--bad-handshake", action="store_true")
    args = parser.parse_args()

    protocol = "bogus/9" if args.bad_handshake else "merge-bbo/1"
    sys.stdout.write(json.dumps({"protocol": protocol, "space": None}) + "\n")
    sys.stdout.flush()

    served = 0
    for line in sys.stdin:
        if not line.strip():
            continue
        try:
            request = json.loads(line)
        except json.JSONDecodeError:
            sys.stdout.write(json.dumps({"id": -1, "error": "parse"}) + "\n")
            sys.stdout.flush()
            continue
        request_id = request.get("id", -1)
        if args.hang_at is not None and served >= args.hang_at:
            continue
        if args.fail_at is not None and served == args.fail_at:
            response = {"id": request_id, "error": "synthetic failure"}
        else:
            try:
                z = request["z"]
                x = request["x"]
                active = [v for bit, v in zip(z, x) if bit]
                objective = sum(active) / len(active) if active else 0.0
                response = {
                    "id": request_id,
                    "objective": objective,
                    "aux": {"active_layer_count": float(len(active))},
                }
            except (KeyError, TypeError, ZeroDivisionError) as exc:
                response = {"id": request_id, "error": f"bad request: {exc}"}
        served += 1
        sys.stdout.write(json.dumps(response) + "\n")
        sys.stdout.flush()


if __name__ == "__main__":
    main()
