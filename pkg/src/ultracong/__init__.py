"""Finite-precision tools for congruences modulo ultrafilters on the integers."""

from .logic import TriBool
from .supernatural import OMEGA, ParityRule, SupernaturalNumber, SnClass, parse_sn, format_sn
from .profinite import PrecisionContext, ProfiniteInt
from .sketch import Engine, Principal, Profile, Verdict

__all__ = [
    "TriBool", "OMEGA", "ParityRule", "SupernaturalNumber", "SnClass", "parse_sn", "format_sn",
    "PrecisionContext", "ProfiniteInt", "Engine", "Principal", "Profile", "Verdict",
]
