"""Resampling engine for the variable-assignment Lopsided Local Lemma.

This package holds the instance model, convergence criteria, the sequential
and parallel Moser-Tardos algorithms, witness trees and edge packing.
"""

from mt_engine.model import BadEvent, Instance, VariableSpace, event_prob, is_true, validate

__all__ = ["BadEvent", "Instance", "VariableSpace", "event_prob", "is_true", "validate"]
