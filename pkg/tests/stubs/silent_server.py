#!/usr/bin/env python3
"""Protocol stub: reads requests and never answers."""
import sys

for _ in sys.stdin:
    pass
