"""Multi-issue approval elections, voting rules and free-riding analysis."""

from .core import Deviation, Election, IssueSpec, ValidationError, satisfaction, sorted_sat_vector
from .freeride import (HARMFUL, NEUTRAL, SUCCESSFUL, audit_election, can_manipulate_by_free_riding,
                       find_free_rides, is_free_ride, recognize_free_riding)
from .scoring import (OwaVector, RuleSpec, comparator_rule, owa_rule, parse_rule, pav_f, power_f,
                      thiele_rule, utilitarian_f)
from .solvers import BudgetExceeded, SolverBudget, solve, winner_of_issue

__version__ = "0.1.0"

__all__ = [
    "BudgetExceeded", "Deviation", "Election", "HARMFUL", "IssueSpec", "NEUTRAL", "OwaVector",
    "RuleSpec", "SUCCESSFUL", "SolverBudget", "ValidationError", "audit_election",
    "can_manipulate_by_free_riding", "comparator_rule", "find_free_rides", "is_free_ride",
    "owa_rule", "parse_rule", "pav_f", "power_f", "recognize_free_riding", "satisfaction",
    "solve", "sorted_sat_vector", "thiele_rule", "utilitarian_f", "winner_of_issue",
]
