"""Module entry point: ``python -m wishart_mask_lab``."""

from wishart_mask_lab.cli import app

if __name__ == "__main__":
    app()
