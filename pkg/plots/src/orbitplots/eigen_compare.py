"""Per-eigendirection deviation histories against the reference."""
import sys

from .rendering import script_main


def main(argv=None):
    return script_main("eigen-compare", argv)


if __name__ == "__main__":
    sys.exit(main())
