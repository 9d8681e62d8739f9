"""
codedcomp Utilities

Random streams, statistics, parallel chunking, export, caching and
configuration management.
"""
