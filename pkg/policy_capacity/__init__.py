"""
Policy Capacity

Estimate Policy Information Capacity (PIC) and Policy-Optimal Information
Capacity (POIC) of RL environments from random policy sampling.
"""

__version__ = "0.3.0"
