"""
ANSI color utilities for terminal output
"""


class Colors:
    """ANSI color codes for terminal output"""

    BRIGHT_RED = "\033[91m"
    BRIGHT_GREEN = "\033[92m"
    BRIGHT_YELLOW = "\033[93m"
    BRIGHT_BLUE = "\033[94m"
    BRIGHT_CYAN = "\033[96m"

    BOLD = "\033[1m"
    RESET = "\033[0m"

    # Semantic color aliases for different output types
    ERROR = BRIGHT_RED
    WARNING = BRIGHT_YELLOW
    SUCCESS = BRIGHT_GREEN
    INFO = BRIGHT_CYAN
    HEADER = BOLD + BRIGHT_BLUE
