"""
Shared pytest setup for Blochop: backend/ on the import path and the slow marker
"""

import os
import sys

sys.path.append(os.path.join(os.path.dirname(__file__), 'backend'))


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long acceptance runs (deselect with -m 'not slow')")
