"""Security digital twins from host evidence: collect, forge, deploy, audit."""

__version__ = "0.1.0"
