"""Validation-sweep cost curves (linear vs shot, errors): one figure."""
import sys

from .rendering import script_main


def main(argv=None):
    return script_main("validation", argv)


if __name__ == "__main__":
    sys.exit(main())
