"""ewflab: a verification workbench for extended Wigner's friend scenarios.

The package simulates the qubit circuits behind the standard extended
Wigner's friend arguments, reproduces their outcome tables, derives the
claimed contradictions mechanically (implication chains, epistemic
inference, exact linear feasibility), and constructs explicit witnesses
for the escape routes each argument leaves open.
"""

from ewflab import epistemic, feasibility, possibilistic, qcore, scenario

__all__ = ["epistemic", "feasibility", "possibilistic", "qcore", "scenario"]

__version__ = "0.1.0"
