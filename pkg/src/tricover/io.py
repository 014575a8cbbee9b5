"""JSON input schema, content hashes, the period cache and report writing."""
from __future__ import annotations

import hashlib
import json
import os
import tempfile
from pathlib import Path

import jsonschema
import mpmath as mp
import numpy as np

from .periods import PeriodData, Precision, period_matrices, precision_from
from .quadrature import MAX_LEVEL, TARGET
from .trees import BranchConfig, MarkedBinaryTree, make_tree, tree_to_dict

SCHEMA_VERSION = "1.0"
CACHE_ENV = "THOMAE_CACHE_DIR"

_point = {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2}

CONFIG_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["lambda", "a", "tree"],
    "properties": {
        "lambda": {"type": "array", "items": _point, "minItems": 3},
        "a": {"type": "array", "items": {"type": "integer"}},
        "tree": {
            "type": "object",
            "additionalProperties": False,
            "required": ["inner", "leaves"],
            "properties": {
                "inner": {
                    "type": "array",
                    "items": {
                        "type": "object",
                        "additionalProperties": False,
                        "required": ["id", "color", "adj", "mark"],
                        "properties": {
                            "id": {"type": ["string", "integer"]},
                            "color": {"enum": ["white", "black"]},
                            "adj": {"type": "array", "items": {"type": ["string", "integer"]}},
                            "mark": {"type": ["string", "integer"]},
                        },
                    },
                },
                "leaves": {
                    "type": "array",
                    "items": {
                        "type": "object",
                        "additionalProperties": False,
                        "required": ["id", "branch"],
                        "properties": {
                            "id": {"type": ["string", "integer"]},
                            "branch": {"type": "integer", "minimum": 0},
                        },
                    },
                },
            },
        },
        "Lambda": {"type": "array", "items": {"type": "integer"}},
    },
}


class InputError(ValueError):
    """Schema or semantic problem in user input; ``path`` is a JSON path."""

    def __init__(self, message: str, path: str = "$"):
        super().__init__(f"{path}: {message}")
        self.path = path
        self.message = message


def _json_path(err: jsonschema.ValidationError) -> str:
    out = "$"
    for p in err.absolute_path:
        out += f"[{p}]" if isinstance(p, int) else f".{p}"
    return out


def validate_schema(doc: dict) -> None:
    validator = jsonschema.Draft7Validator(CONFIG_SCHEMA)
    errors = sorted(validator.iter_errors(doc), key=lambda e: list(e.absolute_path))
    if errors:
        e = errors[0]
        raise InputError(e.message, _json_path(e))


def parse_config(doc: dict) -> tuple[BranchConfig, MarkedBinaryTree, tuple[int, ...] | None]:
    validate_schema(doc)
    pts = tuple(complex(re, im) for re, im in doc["lambda"])
    if len(doc["a"]) != len(pts):
        raise InputError("length differs from lambda", "$.a")
    config = BranchConfig(pts, tuple(doc["a"]))
    tree = make_tree(doc["tree"]["inner"], doc["tree"]["leaves"])
    lam = None
    if "Lambda" in doc:
        if len(doc["Lambda"]) != len(pts):
            raise InputError("length differs from lambda", "$.Lambda")
        lam = tuple(int(k) % 3 for k in doc["Lambda"])
    return config, tree, lam


def load_config(path) -> tuple[BranchConfig, MarkedBinaryTree, tuple[int, ...] | None]:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise InputError(f"invalid JSON: {exc}") from exc
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from exc
    return parse_config(doc)


def config_to_dict(config: BranchConfig, tree: MarkedBinaryTree, lam=None) -> dict:
    doc = {
        "lambda": [[p.real, p.imag] for p in config.points],
        "a": list(config.indices),
        "tree": tree_to_dict(tree),
    }
    if lam is not None:
        doc["Lambda"] = [int(k) for k in lam]
    return doc


def canonical(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def input_hash(config: BranchConfig, tree: MarkedBinaryTree, lam=None) -> str:
    return hashlib.sha256(canonical(config_to_dict(config, tree, lam)).encode()).hexdigest()


def period_key(config: BranchConfig, tree: MarkedBinaryTree, precision: Precision, rotation: int = 1) -> str:
    doc = {"input": config_to_dict(config, tree), "precision": [precision.name, precision.dps],
           "quadrature": {"max_level": MAX_LEVEL, "target": TARGET}, "rotation": rotation,
           "schema": SCHEMA_VERSION}
    return hashlib.sha256(canonical(doc).encode()).hexdigest()


# --------------------------------------------------------------------------
# serialisation helpers
# --------------------------------------------------------------------------


def cmatrix(a) -> list:
    a = np.asarray(a, dtype=complex)
    return [[[float(z.real), float(z.imag)] for z in row] for row in a]


def from_cmatrix(rows) -> np.ndarray:
    return np.array([[complex(re, im) for re, im in row] for row in rows], dtype=complex)


def mp_matrix_strings(mat, dps: int) -> list:
    return [[[mp.nstr(mat[i, j].real, dps + 5), mp.nstr(mat[i, j].imag, dps + 5)] for j in range(mat.cols)]
            for i in range(mat.rows)]


def mp_matrix_from(rows, dps: int):
    with mp.workdps(dps):
        return mp.matrix([[mp.mpc(mp.mpf(re), mp.mpf(im)) for re, im in row] for row in rows])


def periods_to_dict(pd: PeriodData) -> dict:
    out = {
        "P_A": cmatrix(pd.P_A), "P_B": cmatrix(pd.P_B), "tau": cmatrix(pd.tau),
        "cond_B": pd.cond_B, "quad_error": pd.quad_error, "symmetry_residual": pd.symmetry_residual,
        "vertices": pd.vertices, "forms": [f.describe() for f in pd.forms],
        "precision": pd.precision.name,
    }
    if pd.mp_P_A is not None:
        d = pd.precision.dps
        with mp.workdps(d):
            out["extended"] = {"P_A": mp_matrix_strings(pd.mp_P_A, d), "P_B": mp_matrix_strings(pd.mp_P_B, d),
                               "tau": mp_matrix_strings(pd.mp_tau, d)}
    return out


def periods_from_dict(doc: dict, precision: Precision) -> PeriodData:
    from .periods import DifferentialBasis, Form  # noqa: F401

    ext = doc.get("extended")
    mpa = mpb = mpt = None
    if ext is not None:
        mpa, mpb, mpt = (mp_matrix_from(ext[k], precision.dps) for k in ("P_A", "P_B", "tau"))
    forms = []
    for text in doc["forms"]:
        kind = int(text.split("dx/y")[1])
        power = int(text.split("^")[1].split(" ")[0])
        forms.append(Form(kind, power))
    return PeriodData(from_cmatrix(doc["P_A"]), from_cmatrix(doc["P_B"]), from_cmatrix(doc["tau"]),
                      doc["cond_B"], doc["quad_error"], doc["symmetry_residual"], list(doc["vertices"]), forms,
                      None, precision, mpa, mpb, mpt)


# --------------------------------------------------------------------------
# cache
# --------------------------------------------------------------------------


def default_cache_dir() -> Path:
    env = os.environ.get(CACHE_ENV)
    if env:
        return Path(env)
    return Path(os.environ.get("XDG_CACHE_HOME", Path.home() / ".cache")) / "tricover"


def atomic_write_json(path: Path, obj) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=".tmp-", suffix=".json")
    try:
        with os.fdopen(fd, "w") as fh:
            json.dump(obj, fh, indent=1, sort_keys=True)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


class PeriodCache:
    """Content-addressed store of period data; writes go through an atomic rename."""

    def __init__(self, root=None):
        self.root = Path(root) if root is not None else default_cache_dir()

    def path(self, key: str) -> Path:
        return self.root / key[:2] / f"{key}.json"

    def get(self, key: str, precision: Precision) -> PeriodData | None:
        p = self.path(key)
        if not p.exists():
            return None
        try:
            with open(p) as fh:
                return periods_from_dict(json.load(fh), precision)
        except (OSError, ValueError, KeyError):
            return None

    def put(self, key: str, pd: PeriodData) -> None:
        atomic_write_json(self.path(key), periods_to_dict(pd))


def cached_periods(config: BranchConfig, tree: MarkedBinaryTree, precision="double", cache: PeriodCache | None = None,
                   rotation: int = 1) -> tuple[PeriodData, bool]:
    """Period data from the cache if present; otherwise computed, stored and re-read.

    Re-reading after a miss makes a cold run and a warm run return identical numbers.
    """
    prec = precision_from(precision)
    if cache is None:
        return period_matrices(config, tree, prec, rotation=rotation), False
    key = period_key(config, tree, prec, rotation)
    hit = cache.get(key, prec)
    if hit is not None:
        return hit, True
    pd = period_matrices(config, tree, prec, rotation=rotation)
    cache.put(key, pd)
    return cache.get(key, prec) or pd, False


def build_report(kind: str, config: BranchConfig, tree: MarkedBinaryTree, lam, precision: str, body: dict,
                 tolerances: dict | None = None) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "kind": kind,
        "input_hash": input_hash(config, tree, lam),
        "precision": precision,
        "tolerances": tolerances or {},
        **body,
    }


def save_report(path, report: dict) -> None:
    atomic_write_json(Path(path), report)
