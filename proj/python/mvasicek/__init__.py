"""Short-rate model with memory: closed-form bonds and options, simulation, PDE and calibration."""

from ._core import (
    AffineCoefficients,
    CalibrationResult,
    InputError,
    McEstimate,
    ModelParams,
    NumericalError,
    OptionQuote,
    affine,
    bond_curve,
    bond_price,
    calibrate,
    call_price,
    call_quote,
    discount_vol,
    l_fn,
    m_fn,
    mc_bond_price,
    pde_bond_price,
    put_price,
    put_quote,
    read_quotes,
    simulate,
    yield_at,
)

__all__ = [
    "AffineCoefficients",
    "CalibrationResult",
    "InputError",
    "McEstimate",
    "ModelParams",
    "NumericalError",
    "OptionQuote",
    "affine",
    "bond_curve",
    "bond_price",
    "calibrate",
    "call_price",
    "call_quote",
    "discount_vol",
    "l_fn",
    "m_fn",
    "mc_bond_price",
    "pde_bond_price",
    "put_price",
    "put_quote",
    "read_quotes",
    "simulate",
    "yield_at",
]
