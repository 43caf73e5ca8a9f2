"""Program-spectra laboratory: Mini-C probe instrumentation, simulated
spectrum collection over a serial link, and pass/fail spectra diagnosis."""

from ._core import (
    COUNT_SATURATION,
    FRAME_SIZE,
    Program,
    decode_frame,
    diagnose,
    encode_frame,
    instrument,
    parse,
    print_program,
    run_function,
    run_scenario,
)

__all__ = [
    "COUNT_SATURATION",
    "FRAME_SIZE",
    "Program",
    "decode_frame",
    "diagnose",
    "encode_frame",
    "instrument",
    "parse",
    "print_program",
    "run_function",
    "run_scenario",
]
