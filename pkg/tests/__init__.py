"""Tests package for the plastic corrector."""
