#!/usr/bin/env python
"""graphrecover: graph signal recovery with worst-case error guarantees."""
import sys

from cli.entry import main

if __name__ == "__main__":
    sys.exit(main())
