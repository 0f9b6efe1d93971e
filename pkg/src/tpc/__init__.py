"""Product codes with Chase-Pyndiah decoding and GMI-optimized soft-output scaling."""

from .codes import build_code, encode, is_codeword, bdd_decode
from .product import ProductCode, encode_product, original_cp_decode, gmi_cp_decode, calibrate_schedule

__all__ = [
    "build_code",
    "encode",
    "is_codeword",
    "bdd_decode",
    "ProductCode",
    "encode_product",
    "original_cp_decode",
    "gmi_cp_decode",
    "calibrate_schedule",
]
__version__ = "0.1.0"
