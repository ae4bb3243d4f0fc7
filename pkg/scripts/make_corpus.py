#!/usr/bin/env python3
"""Generate a synthetic transcript file for import."""

import argparse
import json
from pathlib import Path

from cal.corpus import synthetic_transcript


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("out", help="output JSON path")
    parser.add_argument("--conversations", type=int, default=30)
    parser.add_argument("--min-utterances", type=int, default=10)
    parser.add_argument("--max-utterances", type=int, default=20)
    parser.add_argument("--seed", type=int, default=7)
    args = parser.parse_args()
    transcript = synthetic_transcript(
        args.conversations, args.min_utterances, args.max_utterances, args.seed
    )
    Path(args.out).write_text(json.dumps(transcript, indent=2), "utf-8")
    total = sum(len(c["utterances"]) for c in transcript)
    print(f"wrote {args.out}: {len(transcript)} conversations, {total} utterances")


if __name__ == "__main__":
    main()
