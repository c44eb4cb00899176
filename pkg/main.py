#!/usr/bin/env python3
"""
Main entry point for the tilt coverage toolkit.

Computes the uplink coverage probability of a 3D-beamforming massive-MIMO
network with height-distributed users and finds the coverage-maximising
antenna tilt. See `python main.py --help` for the verbs.
"""

import sys
from pathlib import Path

# Add the project root to the Python path
project_root = Path(__file__).parent
sys.path.insert(0, str(project_root))

from tilt_coverage.cli import main


if __name__ == "__main__":
    sys.exit(main())
