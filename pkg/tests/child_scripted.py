"""Scripted objective for protocol tests.

Replies ``y = [sum(x), id]``. Command-line options inject faults at given ids:
``--malformed K`` sends a broken line, ``--slow K:SECONDS`` answers late,
``--error K`` replies with an error field, ``--exit K`` dies without replying,
``--nan K`` returns a non-finite value, ``--wrong-id K`` answers with id K+1000.
"""

import argparse
import json
import sys
import time

parser = argparse.ArgumentParser()
parser.add_argument("--malformed", type=int, action="append", default=[])
parser.add_argument("--slow", action="append", default=[])
parser.add_argument("--error", type=int, action="append", default=[])
parser.add_argument("--exit", type=int, action="append", default=[])
parser.add_argument("--nan", type=int, action="append", default=[])
parser.add_argument("--wrong-id", type=int, action="append", default=[])
args = parser.parse_args()
slow = {int(k): float(v) for k, v in (s.split(":") for s in args.slow)}


def send(obj):
    sys.stdout.write(json.dumps(obj) + "\n")
    sys.stdout.flush()


for line in sys.stdin:
    req = json.loads(line)
    k, x = req["id"], req["x"]
    if k in args.malformed:
        sys.stdout.write('{"id": %d, "y": [1.0,\n' % k)
        sys.stdout.flush()
        continue
    if k in args.exit:
        sys.stderr.write(f"fatal: simulator crashed on request {k}\n")
        sys.stderr.flush()
        sys.exit(3)
    if k in args.error:
        send({"id": k, "error": f"mesh failed for request {k}"})
        continue
    if k in slow:
        time.sleep(slow[k])
    if k in args.nan:
        sys.stdout.write('{"id": %d, "y": [NaN, 1.0]}\n' % k)
        sys.stdout.flush()
        continue
    send({"id": k + 1000 if k in args.wrong_id else k, "y": [sum(x), k]})
