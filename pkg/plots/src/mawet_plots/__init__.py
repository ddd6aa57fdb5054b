"""Figure rendering for transmit-power experiment result CSVs."""

from .figures import (FIGURE_KINDS, FigureSpec, MissingColumnError,
                      aggregate, read_rows, render_figure)

__version__ = "0.1.0"
