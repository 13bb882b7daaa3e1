"""Private public-good allocation via noised consensus ADMM on the Nash welfare objective."""

__version__ = "0.1.0"
