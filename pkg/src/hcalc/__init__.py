"""Numerical first-order calculus on the Heisenberg group.

Submodules cover the group arithmetic (:mod:`hcalc.group`), horizontal
curve lifting (:mod:`hcalc.curves`), Carnot-Caratheodory distance brackets
(:mod:`hcalc.metric`), directional-derivative estimators
(:mod:`hcalc.calculus`), a truncated tube-cover model of the rational-line
set (:mod:`hcalc.uds`), the derivative maximization iteration
(:mod:`hcalc.maximizer`), and the verification harness behind the ``hcalc``
command line tool (:mod:`hcalc.suites`, :mod:`hcalc.cli`).
"""

__version__ = "0.1.0"
