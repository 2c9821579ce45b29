"""Graph representation and synthetic generators."""
