"""
ExperimentConfigModel - JSON schema (draft-07) of an experiment configuration file.

Every object forbids additional properties so misspelt keys are rejected instead of silently ignored.
Positions are in metres and angles in degrees.
"""

_POSITION = {
    "type": "array",
    "items": {"type": "number"},
    "minItems": 3,
    "maxItems": 3,
}

_POSITIVE = {"type": "number", "exclusiveMinimum": 0}

_METHODS = ["fa", "zf_ao", "uniform_baseline_fa", "uniform_baseline_zf"]

ExperimentConfigModel = {
    "$id": "vlc-shaper/experiment-config#",
    "$schema": "http://json-schema.org/draft-07/schema#",
    "title": "Experiment configuration",
    "type": "object",
    "properties": {
        "name": {"type": "string"},
        "room": {
            "type": "object",
            "properties": {
                "dimensions": {
                    "type": "array",
                    "items": _POSITIVE,
                    "minItems": 3,
                    "maxItems": 3,
                },
                "leds": {"type": "array", "items": _POSITION, "minItems": 1},
                "users": {"type": "array", "items": _POSITION, "minItems": 1},
                "led_normal": _POSITION,
                "pd_normal": _POSITION,
                "params": {
                    "type": "object",
                    "properties": {
                        "eta": _POSITIVE,
                        "gamma_pd": _POSITIVE,
                        "area_r": _POSITIVE,
                        "theta_half_deg": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 90},
                        "fov_deg": {"type": "number", "exclusiveMinimum": 0, "maximum": 90},
                        "ts": _POSITIVE,
                        "kappa": _POSITIVE,
                    },
                    "additionalProperties": False,
                },
            },
            "required": ["leds", "users"],
            "additionalProperties": False,
        },
        "modulation": {
            "type": "object",
            "properties": {
                "order": {"type": "integer", "minimum": 2},
                "peak_policy": {"enum": ["sweep_peak", "sweep_noise"]},
            },
            "required": ["order"],
            "additionalProperties": False,
        },
        "noise": {
            "type": "object",
            "properties": {
                "a_over_sigma_db": {"type": "array", "items": {"type": "number"}, "minItems": 1},
                "db_convention": {"enum": ["amplitude", "power"]},
            },
            "required": ["a_over_sigma_db"],
            "additionalProperties": False,
        },
        "method": {
            "oneOf": [
                {"enum": _METHODS},
                {"type": "array", "items": {"enum": _METHODS}, "minItems": 1, "uniqueItems": True},
            ]
        },
        "firefly": {
            "type": "object",
            "properties": {
                "population": {"type": "integer", "minimum": 2},
                "generations": {"type": "integer", "minimum": 0},
                "beta0": _POSITIVE,
                "gamma_fa": _POSITIVE,
                "alpha0": {"type": "number", "exclusiveMinimum": 0, "maximum": 1},
                "binned_search": {"type": "boolean"},
                "penalty": {
                    "type": "object",
                    "properties": {
                        "lambda1": {"type": "number", "minimum": 0},
                        "lambda2": {"type": "number", "minimum": 0},
                        "lambda3": {"type": "number", "minimum": 0},
                        "lambda4": {"type": "number", "minimum": 0},
                    },
                    "additionalProperties": False,
                },
            },
            "additionalProperties": False,
        },
        "ao": {
            "type": "object",
            "properties": {
                "outer_iters": {"type": "integer", "minimum": 1},
                "improvement_tol": {"type": "number", "minimum": 0},
                "pmf": {
                    "type": "object",
                    "properties": {
                        "tol": _POSITIVE,
                        "max_iters": {"type": "integer", "minimum": 1},
                    },
                    "additionalProperties": False,
                },
                "ccp": {
                    "type": "object",
                    "properties": {
                        "max_iters": {"type": "integer", "minimum": 1},
                        "tol": _POSITIVE,
                        "inner_step": _POSITIVE,
                        "inner_max_iters": {"type": "integer", "minimum": 1},
                    },
                    "additionalProperties": False,
                },
            },
            "additionalProperties": False,
        },
        "quadrature": {
            "type": "object",
            "properties": {
                "points_per_sigma": {"type": "integer", "minimum": 4},
                "margin_sigmas": {"type": "number", "minimum": 6},
                "component_cap": {"type": "integer", "minimum": 1},
            },
            "additionalProperties": False,
        },
        "seed": {"type": "integer", "minimum": 0, "maximum": 18446744073709551615},
        "output_dir": {"type": "string", "minLength": 1},
    },
    "required": ["room", "modulation", "noise"],
    "additionalProperties": False,
}
