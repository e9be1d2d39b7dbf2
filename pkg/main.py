# --- File: main.py (Bootstrap) ---
import sys
import multiprocessing as mp

from core.cli import run


def main():
    """Command-line entry point."""
    return run(sys.argv[1:])


if __name__ == '__main__':
    # Windows multiprocessing support
    mp.freeze_support()
    sys.exit(main())
