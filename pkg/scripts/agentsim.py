#!/usr/bin/env python3
"""
Agent Simulation Runner
=======================
Validate scenario configs, run scenarios and summarize traces.

Usage:
    # Run the shipped configuration scenario and write its trace:
    python scripts/agentsim.py run --scenario configuration --out trace.jsonl

    # Same run with a function agent that never answers, checked for conformance:
    python scripts/agentsim.py run --scenario configuration --mute f2 --steps 12 --conformance

    # Check a config file:
    python scripts/agentsim.py validate config/epidemic.json

    # Summarize a trace:
    python scripts/agentsim.py stats trace.jsonl

Environment:
    SIM_SEED, SIM_STEPS, OBLIGATION_TIMEOUT_ROUNDS, INHIBITION_THRESHOLD,
    REINFORCE_DELTA, DECAY_DELTA, CONFIG_DIR, LOG_LEVEL, LOG_JSON
"""

import sys
from pathlib import Path

# Add project root to path
project_root = Path(__file__).parent.parent
sys.path.insert(0, str(project_root))

# Load .env file if present (for local development)
try:
    from dotenv import load_dotenv
    load_dotenv(project_root / '.env')
except ImportError:
    pass

from src.cli import main


if __name__ == "__main__":
    sys.exit(main())
