"""Breakpoint search and stability audits."""
