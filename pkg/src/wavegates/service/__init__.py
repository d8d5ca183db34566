"""HTTP service exposing scenario runs, sweeps, analysis, and rendering."""
