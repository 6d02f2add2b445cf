#!/usr/bin/env python3
"""Host a trivial external policy (always hold) on the wire protocol.

Useful as a smoke test for `bridgenet run --policy remote` and as a
starting point for hosting a real policy: replace `hold_policy` with a
callable mapping (agent, step, stack frames, scenario record) to a flat
move code 0..8.
"""

import argparse

from bridgenet.protocol import PolicyServer, hold_policy


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--port", type=int, default=4780)
    args = parser.parse_args()

    server = PolicyServer(hold_policy, host=args.host, port=args.port).start()
    print(f"serving hold policy on {server.address} (ctrl-c to stop)")
    try:
        while True:
            input()
    except (KeyboardInterrupt, EOFError):
        server.stop()


if __name__ == "__main__":
    main()
