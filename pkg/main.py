import sys

from sir_ident.cli import cli


def main():
    """Main entry point for the command-line interface."""
    sys.exit(cli(obj={}))


if __name__ == "__main__":
    main()
