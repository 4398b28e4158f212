"""
framescope: semantic maps and frame drift from a dated text corpus.

    python framescope.py map --config framescope.json --window A
"""

import sys

from dotenv import load_dotenv

from src.cli import main

load_dotenv()

if __name__ == "__main__":
    sys.exit(main())
