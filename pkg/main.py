"""
Main entry point for the Grothendieck lower-bound laboratory.

Run `python main.py <command>`; `python main.py --help` lists the commands.
"""

import sys

from src.cli.commands import main as cli_main


def main() -> int:
    """Main entry point for the Grothendieck lower-bound laboratory."""
    if sys.stdout.isatty() and len(sys.argv) == 1:
        sys.stderr.write(
            """
    ╔═══════════════════════════════════════════════════════════════╗
    ║            Grothendieck Lower-Bound Laboratory (glab)         ║
    ║                                                               ║
    ║   Davie-Reeds constants, strip games and the perturbed game   ║
    ╚═══════════════════════════════════════════════════════════════╝
"""
        )
    return cli_main()


if __name__ == "__main__":
    sys.exit(main())
