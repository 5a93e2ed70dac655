"""Run configuration and built-in presets."""
