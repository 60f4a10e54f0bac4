"""
Run Experiment - entry script for the plate solver experiments.

Usage:
    python scripts/run_experiment.py verify-test1
    python scripts/run_experiment.py sweep-beta --workers 4
    python scripts/run_experiment.py --help
"""

import sys
from pathlib import Path

project_root = Path(__file__).parent.parent
sys.path.insert(0, str(project_root))

from src.cli import main


if __name__ == "__main__":
    sys.exit(main())
