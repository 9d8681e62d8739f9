"""
codedcomp Decoders

Erasure decoders sharing the ErasureDecoder interface.
"""
