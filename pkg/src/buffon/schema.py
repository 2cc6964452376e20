"""JSON schemas for the CLI's machine-readable output."""

_num = {"type": "number"}
_int = {"type": "integer", "minimum": 0}
_nullable_num = {"type": ["number", "null"]}

SAMPLE = {
    "type": "object",
    "required": ["expr", "binding", "n", "seed", "successes", "p_hat", "ci95", "flips", "censored", "oracle"],
    "properties": {
        "expr": {"type": "string"},
        "binding": {"type": ["string", "null"]},
        "n": _int,
        "seed": _int,
        "successes": _int,
        "p_hat": _num,
        "ci95": {"type": "array", "items": _num, "minItems": 2, "maxItems": 2},
        "flips": {
            "type": "object",
            "required": ["mean", "median", "p95", "max"],
            "properties": {"mean": _num, "median": _int, "p95": _int, "max": _int},
        },
        "censored": _int,
        "oracle": _nullable_num,
        "warnings": {"type": "array", "items": {"type": "string"}},
    },
}

PGF = {
    "type": "object",
    "required": ["class", "lambda", "order", "coeffs"],
    "properties": {
        "class": {"type": "string"},
        "lambda": {"type": "string", "pattern": r"^\d+/\d+$"},
        "order": _int,
        "coeffs": {"type": "array", "items": {"type": "string", "pattern": r"^-?\d+(/\d+)?$"}},
    },
}

EVAL = {
    "type": "object",
    "required": ["expr", "binding", "value", "error_bound"],
    "properties": {
        "expr": {"type": "string"},
        "binding": {"type": ["string", "null"]},
        "value": _num,
        "error_bound": _num,
    },
}

DIST = {
    "type": "object",
    "required": ["kind", "lambda", "n", "seed", "bins", "mean_trials", "chi_square"],
    "properties": {
        "kind": {"enum": ["poisson", "logarithmic", "geometric"]},
        "lambda": _num,
        "n": _int,
        "seed": _int,
        "bins": {"type": "object", "additionalProperties": _int},
        "mean_trials": _num,
        "chi_square": {
            "type": "object",
            "required": ["statistic", "dof", "p_value", "cells"],
            "properties": {
                "statistic": _num,
                "dof": _int,
                "p_value": _num,
                "cells": {
                    "type": "array",
                    "items": {
                        "type": "object",
                        "required": ["label", "observed", "expected"],
                        "properties": {"label": {"type": "string"}, "observed": _int, "expected": _num},
                    },
                },
            },
        },
    },
}

NAMED = {
    "type": "object",
    "required": ["name", "expr", "description", "weak", "oracle"],
    "properties": {
        "name": {"type": "string"},
        "expr": {"type": "string"},
        "description": {"type": "string"},
        "weak": {"type": "boolean"},
        "oracle": _num,
    },
}

NAMED_LIST = {"type": "array", "items": NAMED}
