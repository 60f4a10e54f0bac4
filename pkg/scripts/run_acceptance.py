"""
Run Acceptance - entry script for the acceptance suite.

Usage:
    python scripts/run_acceptance.py              # every case
    python scripts/run_acceptance.py --phase 1    # property checks only
    python scripts/run_acceptance.py --id 4 --id 5
"""

import argparse
import logging
import sys
from pathlib import Path

project_root = Path(__file__).parent.parent
sys.path.insert(0, str(project_root))

from src.config import get_log_level
from tests.acceptance import ACCEPTANCE_CASES, AcceptanceRunner


def print_banner():
    print("\n" + "=" * 60)
    print("  Plate solver acceptance suite")
    print("=" * 60)
    for case in ACCEPTANCE_CASES:
        print(f"  #{case.id} | phase {case.phase} | {case.name}")
    print()


def main() -> int:
    parser = argparse.ArgumentParser(description="Plate solver acceptance suite")
    parser.add_argument("--phase", type=int, choices=[1, 2, 3], help="run one phase only")
    parser.add_argument("--id", type=int, action="append", help="run the given case (repeatable)")
    parser.add_argument("--workers", type=int, default=1, help="worker processes for sweeps")
    parser.add_argument("--list", action="store_true", help="list the cases and exit")
    parser.add_argument("--verbose", "-v", action="store_true", help="debug logging")
    args = parser.parse_args()

    print_banner()
    if args.list:
        return 0
    logging.basicConfig(level=logging.DEBUG if args.verbose else get_log_level())

    runner = AcceptanceRunner({"workers": args.workers})
    results = runner.run_all(phase_filter=args.phase, case_ids=args.id)
    return 0 if all(r.passed for r in results) else 1


if __name__ == "__main__":
    sys.exit(main())
