"""Worked pipelines built from the generic operators: boundary tracing and orbit classification."""
