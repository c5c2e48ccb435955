"""Desk-scale finite models: discretized games and Monte Carlo witnesses."""
