"""
Output formatting utilities with semantic color schemes

Command results go to stdout, diagnostics to stderr. Colors are dropped when
MLNN_NO_COLOR is set or the stream is not a terminal.
"""

import sys
from typing import Sequence, TextIO

from .colors import Colors
from .logging import colors_enabled


def _paint(text: str, color: str, stream: TextIO) -> str:
    if colors_enabled() and stream.isatty():
        return f"{color}{text}{Colors.RESET}"
    return text


class OutputFormatter:
    """Formats different types of output with appropriate colors and styles"""

    @staticmethod
    def format_error(message: str, stream: TextIO = sys.stderr) -> str:
        """Format error messages"""
        return _paint(f"Error: {message}", Colors.ERROR, stream)

    @staticmethod
    def format_warning(message: str, stream: TextIO = sys.stderr) -> str:
        """Format warning messages"""
        return _paint(f"Warning: {message}", Colors.WARNING, stream)

    @staticmethod
    def format_success(message: str, stream: TextIO = sys.stdout) -> str:
        """Format success messages"""
        return _paint(f"✓ {message}", Colors.SUCCESS, stream)

    @staticmethod
    def format_info(message: str, stream: TextIO = sys.stdout) -> str:
        """Format informational messages"""
        return _paint(message, Colors.INFO, stream)

    @staticmethod
    def format_header(text: str, stream: TextIO = sys.stdout) -> str:
        """Format header text"""
        return _paint(text, Colors.HEADER, stream)

    @staticmethod
    def format_table(
        headers: Sequence[str], rows: Sequence[Sequence[object]]
    ) -> str:
        """Plain fixed-width table for short command summaries."""
        cells = [[str(h) for h in headers]] + [[str(c) for c in row] for row in rows]
        widths = [max(len(row[k]) for row in cells) for k in range(len(headers))]
        lines = ["  ".join(c.ljust(w) for c, w in zip(row, widths)) for row in cells]
        lines.insert(1, "  ".join("-" * w for w in widths))
        return "\n".join(lines)


# Convenience functions for common formatting needs
def print_error(message: str) -> None:
    """Print an error message with formatting"""
    print(OutputFormatter.format_error(message), file=sys.stderr)


def print_warning(message: str) -> None:
    """Print a warning message with formatting"""
    print(OutputFormatter.format_warning(message), file=sys.stderr)


def print_success(message: str) -> None:
    """Print a success message with formatting"""
    print(OutputFormatter.format_success(message))


def print_info(message: str) -> None:
    """Print an info message with formatting"""
    print(OutputFormatter.format_info(message))


def print_header(text: str) -> None:
    """Print a formatted header"""
    print(OutputFormatter.format_header(text))


def print_table(headers: Sequence[str], rows: Sequence[Sequence[object]]) -> None:
    """Print a plain table"""
    print(OutputFormatter.format_table(headers, rows))
