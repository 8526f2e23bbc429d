"""Narrative strings attached to reports."""

RADO_REMARK = (
    "f is q-analytic off its zero set and of class C^(q-1) across it; the zero set has "
    "empty interior, so dbar^(q-1) f is harmonic there and the extension holds on the whole domain. "
    "A boundary maximum modulus principle that f obeys off its zero set then holds on the "
    "whole domain as well, with no further check."
)

RADO_INTERIOR = (
    "the zero set has interior nodes; the extension statement needs a zero set without interior"
)

RADO_JUMP = "a derivative of order below q jumps across the zero set; f is not C^(q-1) there"

HARTOGS_REMARK = (
    "separately polyanalytic in each variable with the stated orders; the slices assemble "
    "into one jointly polyanalytic function on the polydisc"
)

TRACE_REMARK = (
    "|f| is constant on the hypersurface patch; the one-sided extension then has the form "
    "lambda*conj(Q)/Q with |lambda| equal to that constant"
)

BMMP_REMARK = "no interior value of |f| exceeds its boundary maximum on any attached disc"
