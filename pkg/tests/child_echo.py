"""Echo objective: replies with the first m coordinates of x."""

import json
import sys

m = int(sys.argv[1]) if len(sys.argv) > 1 else 2
for line in sys.stdin:
    req = json.loads(line)
    sys.stdout.write(json.dumps({"id": req["id"], "y": req["x"][:m]}) + "\n")
    sys.stdout.flush()
