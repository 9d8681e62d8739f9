"""
codedcomp Analysis

Execution-time analytics and numerical stability studies.
"""
