"""Almost-Fuchsian toolkit: limit sets, minimal disks and empty-ball certificates."""

__version__ = "0.1.0"
