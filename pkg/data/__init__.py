"""Artifact writers and readers."""
