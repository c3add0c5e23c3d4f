"""relctl: a relation-algebra engine over BDDs for Condorcet election control.

The package computes dominance and uncovered-set winners of elections,
solves constructive control by deleting voters exactly (minimum deletions,
exact solution counts, enumeration), evaluates relational expression
scripts, and generates hard control instances from exact-cover problems.
"""

from relctl.bdd import BddError, BoolFn, Manager, VarBlock
from relctl.carrier import UNIT, Base, Carrier, Powerset, Product, Unit
from relctl.relalg import Context, RelAlgError, Relation, TypeMismatchError

__version__ = "0.1.0"

__all__ = [
    "BddError",
    "BoolFn",
    "Manager",
    "VarBlock",
    "UNIT",
    "Base",
    "Carrier",
    "Powerset",
    "Product",
    "Unit",
    "Context",
    "RelAlgError",
    "Relation",
    "TypeMismatchError",
    "__version__",
]
