#!/usr/bin/env python3
"""Stream a saved marker log into a running ``bcikit record`` endpoint.

Acts as a stand-in session UI: connects over TCP, sends one JSON marker per
line in timestamp order, and prints every response.  Useful for exercising
the recorder wire protocol end to end and for regenerating a session pair
from an existing marker transcript.

    bcikit record --out-markers out/replayed.jsonl &   # prints the port
    python3 scripts/replay_session.py --markers out/session.markers.jsonl \
        --port 40123
"""
import argparse
import json
import socket
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from bcikit.io import load_markers


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--markers", required=True, help="marker log to replay")
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--port", type=int, required=True)
    parser.add_argument("--quiet", action="store_true", help="only print the summary")
    args = parser.parse_args()

    log = load_markers(args.markers)
    accepted = rejected = 0
    with socket.create_connection((args.host, args.port), timeout=10.0) as sock:
        reader = sock.makefile("r", encoding="utf-8", newline="\n")
        writer = sock.makefile("w", encoding="utf-8", newline="\n")
        for marker in log:
            writer.write(json.dumps(marker.to_dict(), sort_keys=True) + "\n")
            writer.flush()
            response = json.loads(reader.readline())
            if response.get("ok"):
                accepted += 1
            else:
                rejected += 1
            if not args.quiet:
                print(f"{marker.t_sample:>9d} {marker.phase.value:16s} -> {response}")
        writer.close()
        reader.close()
    print(f"replayed {len(log)} markers: {accepted} accepted, {rejected} rejected")
    return 0 if rejected == 0 else 1


if __name__ == "__main__":
    sys.exit(main())
