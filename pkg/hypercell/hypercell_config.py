"""
Hypercell Configuration

Centralized configuration for the hyper-cellular simulator.
Values come from the environment (or a local .env file) and act as defaults:
scenario [knobs] override them, CLI flags override both.
"""

import os

from dotenv import load_dotenv

load_dotenv()

# UDP coordination link (split-process mode)
UDP_HOST = os.getenv("HCN_UDP_HOST", "127.0.0.1")
SBS_PORT = int(os.getenv("HCN_SBS_PORT", "5700"))
DBS_PORT_BASE = int(os.getenv("HCN_DBS_PORT_BASE", "5701"))
# How long a station host waits for a datagram it was told to expect
UDP_TIMEOUT_S = float(os.getenv("HCN_UDP_TIMEOUT_S", "5.0"))

LOG_LEVEL = os.getenv("HCN_LOG_LEVEL", "WARNING")

# Scenario knob defaults (all times in integer microseconds)
HIGH_LOAD_THRESHOLD = float(os.getenv("HCN_HIGH_LOAD_THRESHOLD", "0.8"))
WAKE_LATENCY_US = int(os.getenv("HCN_WAKE_LATENCY_US", "100000"))
IDLE_TIMEOUT_US = int(os.getenv("HCN_IDLE_TIMEOUT_US", "5000000"))
CONTROL_DELAY_US = int(os.getenv("HCN_CONTROL_DELAY_US", "1000"))
AIR_DELAY_US = int(os.getenv("HCN_AIR_DELAY_US", "0"))
DBS_CAPACITY = int(os.getenv("HCN_DBS_CAPACITY", "7"))

# Placeholder state powers in watts, for relative comparisons only
POWER_SLEEP_W = float(os.getenv("HCN_POWER_SLEEP_W", "5"))
POWER_WAKING_W = float(os.getenv("HCN_POWER_WAKING_W", "30"))
POWER_ACTIVE_W = float(os.getenv("HCN_POWER_ACTIVE_W", "50"))
