"""Position-space bundle of sampled reachable-set trajectories."""
import sys

from .rendering import script_main


def main(argv=None):
    return script_main("bundle3d", argv)


if __name__ == "__main__":
    sys.exit(main())
