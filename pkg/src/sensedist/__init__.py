"""sensedist: multi-task learning of sense-label distributions for
implicit discourse relations, with within-corpus and transfer evaluation."""

__version__ = "0.1.0"

from .hierarchy import SenseHierarchy, default_hierarchy
from .distributions import LabelDistribution

__all__ = ["SenseHierarchy", "default_hierarchy", "LabelDistribution", "__version__"]
