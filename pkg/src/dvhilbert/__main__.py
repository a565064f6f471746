"""
Launcher for ``python -m dvhilbert``
"""

from .cli import run

if __name__ == "__main__":
    run()
