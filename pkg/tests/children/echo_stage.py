"""Echo stage that answers in shuffled groups to exercise out-of-order matching.

Protocol: reads the handshake line, then buffers requests; every GROUP
requests it shuffles the buffer (seeded by group index, so runs are
reproducible) and emits the responses. Callers must send a multiple of
GROUP requests per batch. Remaining requests are answered at EOF.
"""

import json
import random
import sys

GROUP = 5


def emit(buffer, group_idx):
    random.Random(group_idx).shuffle(buffer)
    for record in buffer:
        answer = {"id": record["id"], "text": "echo:" + record["text"]}
        sys.stdout.write(json.dumps(answer) + "\n")
        sys.stdout.flush()
    buffer.clear()


def main():
    handshake = json.loads(sys.stdin.readline())
    assert handshake["protocol"] == 1
    buffer = []
    group_idx = 0
    for line in sys.stdin:
        line = line.strip()
        if not line:
            continue
        buffer.append(json.loads(line))
        if len(buffer) == GROUP:
            emit(buffer, group_idx)
            group_idx += 1
    if buffer:
        emit(buffer, group_idx)


if __name__ == "__main__":
    main()
