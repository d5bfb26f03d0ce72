"""Brute-force oracles: literal formula evaluation, system corpora and theorem suites."""
