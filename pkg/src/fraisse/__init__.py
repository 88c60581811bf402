"""Workbench for finite structures with graded subset partitions, circular
class orders and partial rotation maps."""

__version__ = "0.1.0"
