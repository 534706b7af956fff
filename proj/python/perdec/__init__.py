"""Persuasive decision-calibrated prediction.

Weights are numpy vectors over the instance's hypotheses, in the order of
``Instance.hypothesis_ids``. Passing ``eta`` switches every audit and the
solver to the quantal response with that inverse temperature.
"""

from ._core import (
    Dataset,
    Instance,
    PerdecError,
    __version__,
    brute_force,
    decision_calibration,
    full_calibration_error,
    regret,
    sender_utility,
    signaling_bound,
    solve,
)

__all__ = [
    "Dataset",
    "Instance",
    "PerdecError",
    "__version__",
    "brute_force",
    "decision_calibration",
    "full_calibration_error",
    "regret",
    "sender_utility",
    "signaling_bound",
    "solve",
]
