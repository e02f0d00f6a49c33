"""Challenge-set mining and triage for machine translation models.

Surfaces subsets of training data and usage logs where a translation model
is likely weak (rule failures, unfamiliar topics), computes per-set quality
and coverage metrics, and serves them over an HTTP API for human triage.
"""

__version__ = "0.1.0"
