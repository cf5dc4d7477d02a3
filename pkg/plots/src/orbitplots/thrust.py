"""Thrust-magnitude histories for the finite eigendirections."""
import sys

from .rendering import script_main


def main(argv=None):
    return script_main("thrust", argv)


if __name__ == "__main__":
    sys.exit(main())
