"""Semi-synthetic label-growth experiments and their audit log."""
