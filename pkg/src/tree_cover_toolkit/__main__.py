"""Entry point for python -m tree_cover_toolkit."""
from tree_cover_toolkit.presentation.cli import cli

if __name__ == "__main__":
    cli()
