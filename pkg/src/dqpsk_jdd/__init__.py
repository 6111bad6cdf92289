"""Joint demapping and LDPC decoding for differential QPSK over AWGN."""

__version__ = "0.1.0"
