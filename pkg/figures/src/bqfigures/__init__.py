"""Figure rendering for bertrandq result directories.

This package only reads the documented CSV tables emitted by the simulator's
command-line tool; it never imports the simulator itself.
"""

__version__ = "0.1.0"
