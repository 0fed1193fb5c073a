"""CLI entrypoint (budde)."""

from src.cli import main


def run() -> None:
    """Entry point for the budde command."""
    raise SystemExit(main())


if __name__ == "__main__":
    run()
