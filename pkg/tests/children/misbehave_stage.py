"""Configurable misbehaving stage for error-path tests.

Mode comes from argv[1]:
  error    — answers the first request with {id, error}
  crash    — answers the first request, then exits 3 mid-stream
  garbage  — emits a non-JSON line
  silent   — reads requests, never answers (for timeout tests)
"""

import json
import sys
import time


def main():
    mode = sys.argv[1]
    sys.stdin.readline()  # handshake
    first = True
    for line in sys.stdin:
        line = line.strip()
        if not line:
            continue
        record = json.loads(line)
        if mode == "error":
            sys.stdout.write(json.dumps({"id": record["id"], "error": "boom"}) + "\n")
            sys.stdout.flush()
        elif mode == "crash":
            if first:
                sys.stdout.write(
                    json.dumps({"id": record["id"], "text": record["text"]}) + "\n"
                )
                sys.stdout.flush()
                first = False
            else:
                sys.exit(3)
        elif mode == "garbage":
            sys.stdout.write("not json at all\n")
            sys.stdout.flush()
        elif mode == "silent":
            time.sleep(0.05)  # keep reading; never answer


if __name__ == "__main__":
    main()
