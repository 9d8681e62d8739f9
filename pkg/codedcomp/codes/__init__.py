"""
codedcomp Codes

Generator-matrix constructions and the erasure channel.
"""
