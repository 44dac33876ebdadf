import sys

from lib.cli.app import main as cli_main


def main():
    """
    Entry point for the `mfamp` command.

    Runs one of the gen, amp, se, potential or phase commands and returns
    the process exit code (0 success, 2 usage, 3 divergence, 4 numerical
    consistency, 5 I/O).
    """
    return cli_main()


if __name__ == "__main__":
    sys.exit(main())
