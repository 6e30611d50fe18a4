"""Exact arithmetic: F2 vectors/matrices, dyadic rationals, GF(2^m)."""

from .bits import (BitMatrix, BitVector, column_sum, nullspace_basis, pack_rows, rank,
                   unpack_rows)
from .dyadic import DyadicRational
from .gf import (GF2m, GFElement, default_field, gf_inv, gf_mul, gf_pow, minimal_polynomial,
                 poly_mod, poly_mul)
from .matio import MatrixFormatError, format_matrix, parse_matrix, read_matrix, write_matrix

__all__ = [
    "BitMatrix", "BitVector", "column_sum", "nullspace_basis", "pack_rows", "rank",
    "unpack_rows", "DyadicRational", "GF2m", "GFElement", "default_field", "gf_inv",
    "gf_mul", "gf_pow", "minimal_polynomial", "poly_mod", "poly_mul", "MatrixFormatError",
    "format_matrix", "parse_matrix", "read_matrix", "write_matrix",
]
