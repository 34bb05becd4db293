#!/usr/bin/env python3
"""Main entry point for the shape-scaling package."""

import sys

from shape_scaling.cli import main

if __name__ == "__main__":
    sys.exit(main())
