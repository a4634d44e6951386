"""JSON schemas for the CLI report files; the test suite validates every
emitted document against these."""

_NUMBER_OR_NULL = {"type": ["number", "null"]}

SOLVER_RESULT_SCHEMA = {
    "type": "object",
    "required": [
        "assignment",
        "energy",
        "iterations",
        "converged",
        "is_vertex",
        "trace",
    ],
    "properties": {
        "assignment": {"type": "array", "items": {"type": "integer", "minimum": 0}},
        "energy": {"type": "number"},
        "iterations": {"type": "integer", "minimum": 0},
        "converged": {"type": "boolean"},
        "is_vertex": {"type": "boolean"},
        "trace": {
            "type": "array",
            "items": {
                "type": "array",
                "items": {"type": "number"},
                "minItems": 2,
                "maxItems": 2,
            },
        },
    },
}

MATCH_SCHEMA = {
    "type": "object",
    "required": ["command", "polytope", "energy", "seed", "result"],
    "properties": {
        "command": {"const": "match"},
        "polytope": {"enum": ["permutation", "onesided"]},
        "energy": {"enum": ["E2", "onesided", "E1-report-only"]},
        "seed": {"type": ["integer", "null"]},
        "energy_E1": _NUMBER_OR_NULL,
        "result": SOLVER_RESULT_SCHEMA,
    },
}

BOUND_REPORT_SCHEMA = {
    "type": "object",
    "required": [
        "chernoff_value",
        "optimal_t",
        "subspace_dim",
        "mc_estimate",
        "mc_samples",
        "mc_hits",
        "epsilon_hat",
    ],
    "properties": {
        "chernoff_value": _NUMBER_OR_NULL,
        "optimal_t": _NUMBER_OR_NULL,
        "subspace_dim": {"type": "integer", "minimum": 1},
        "mc_estimate": {"type": "number", "minimum": 0, "maximum": 1},
        "mc_samples": {"type": "integer", "minimum": 1},
        "mc_hits": {"type": "integer", "minimum": 0},
        "epsilon_hat": _NUMBER_OR_NULL,
    },
}

CONCAVITY_PAIR_SCHEMA = {
    "type": "object",
    "required": ["a", "b", "certificate", "bound_report"],
    "properties": {
        "a": {"type": "string"},
        "b": {"type": "string"},
        "certificate": {"enum": ["concave", "indefinite", "unavailable"]},
        "margin": _NUMBER_OR_NULL,
        "spectrum_min": _NUMBER_OR_NULL,
        "spectrum_max": _NUMBER_OR_NULL,
        "bound_report": BOUND_REPORT_SCHEMA,
    },
}

CONCAVITY_CHECK_SCHEMA = {
    "type": "object",
    "required": ["command", "pairs", "aggregate"],
    "properties": {
        "command": {"const": "concavity-check"},
        "pairs": {"type": "array", "items": CONCAVITY_PAIR_SCHEMA},
        "aggregate": {
            "type": "object",
            "required": [
                "bound_mean",
                "bound_std",
                "empirical_mean",
                "empirical_std",
            ],
            "properties": {
                "bound_mean": _NUMBER_OR_NULL,
                "bound_std": _NUMBER_OR_NULL,
                "empirical_mean": {"type": "number"},
                "empirical_std": {"type": "number"},
            },
        },
    },
}

BOUND_SCHEMA = {
    "type": "object",
    "required": ["command", "template", "closed_form", "chernoff", "optimal_t"],
    "properties": {
        "command": {"const": "bound"},
        "template": {
            "type": "object",
            "required": ["m", "p", "pos_bound", "neg_bound", "mode"],
        },
        "closed_form": _NUMBER_OR_NULL,
        "chernoff": {"type": "number"},
        "optimal_t": _NUMBER_OR_NULL,
        "subspace_dim": {"type": "integer"},
        "mc": {"anyOf": [BOUND_REPORT_SCHEMA, {"type": "null"}]},
    },
}

ENSEMBLE_SCHEMA = {
    "type": "object",
    "required": [
        "command",
        "template",
        "n",
        "trials",
        "restarts",
        "vertex_fraction",
        "face_dimension_histogram",
    ],
    "properties": {
        "command": {"const": "ensemble"},
        "n": {"type": "integer", "minimum": 2},
        "trials": {"type": "integer", "minimum": 1},
        "restarts": {"type": "integer", "minimum": 1},
        "vertex_fraction": {"type": "number", "minimum": 0, "maximum": 1},
        "face_dimension_histogram": {
            "type": "object",
            "additionalProperties": {"type": "integer", "minimum": 0},
        },
        "mean_iterations": {"type": "number"},
    },
}

DISSIMILARITY_SCHEMA = {
    "type": "object",
    "required": ["command", "labels", "values", "failures"],
    "properties": {
        "command": {"const": "dissimilarity"},
        "labels": {"type": "array", "items": {"type": "string"}},
        "values": {
            "type": "array",
            "items": {"type": "array", "items": _NUMBER_OR_NULL},
        },
        "failures": {"type": "array"},
    },
}

EMBED_SCHEMA = {
    "type": "object",
    "required": ["command", "labels", "coordinates"],
    "properties": {
        "command": {"const": "embed"},
        "labels": {"type": "array", "items": {"type": "string"}},
        "coordinates": {
            "type": "array",
            "items": {"type": "array", "items": {"type": "number"}},
        },
    },
}

SCHEMAS_BY_COMMAND = {
    "match": MATCH_SCHEMA,
    "concavity-check": CONCAVITY_CHECK_SCHEMA,
    "bound": BOUND_SCHEMA,
    "ensemble": ENSEMBLE_SCHEMA,
    "dissimilarity": DISSIMILARITY_SCHEMA,
    "embed": EMBED_SCHEMA,
}
