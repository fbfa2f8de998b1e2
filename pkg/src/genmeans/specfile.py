"""Versioned JSON specs driving `genmeans verify`.

Three suites share one envelope::

    {"schema_version": 1, "suite": "experiments", "seed": 46106,
     "experiments": [{"name": "...", "mode": "clt",
                      "kind": {"tag": "exp-cauchy"},
                      "dist": {"family": "ExpLog", "lam": 2.0},
                      "n_grid": [1000, 5000], "replicates": 2000,
                      "tolerances": {"clt_ks": 0.05}}]}

    {"schema_version": 1, "suite": "bisym", "n_values": [2, 3], "g_grid": [0.5, 1, 2, 4]}

    {"schema_version": 1, "suite": "structure", "trials": 10000}

`seed` is optional everywhere; the command line seed wins over it, and
DEFAULT_SEED applies when neither is given.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources

from .distributions import distribution_from_dict
from .errors import GenMeansError, SpecError
from .means import mean_kind_from_dict
from .montecarlo import ExperimentSpec, make_experiment

SCHEMA_VERSION = 1
DEFAULT_SEED = 0xB41A
SUITES = ("experiments", "bisym", "structure")


@dataclass
class SuiteSpec:
    suite: str
    seed: int | None
    experiments: list = field(default_factory=list)
    n_values: list = field(default_factory=lambda: [2, 3, 4, 5, 6, 7, 8])
    g_grid: list = field(default_factory=lambda: [0.5, 1.0, 2.0, 4.0])
    trials: int = 10_000


def _int(value, what: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise SpecError(f"{what} must be an integer, got {value!r}")
    return value


def parse_spec(doc: dict) -> SuiteSpec:
    if not isinstance(doc, dict):
        raise SpecError("spec must be a JSON object")
    version = doc.get("schema_version")
    if version != SCHEMA_VERSION:
        raise SpecError(f"unsupported schema_version {version!r}; expected {SCHEMA_VERSION}")
    suite = doc.get("suite", "experiments")
    if suite not in SUITES:
        raise SpecError(f"suite must be one of {SUITES}, got {suite!r}")
    seed = doc.get("seed")
    if seed is not None:
        seed = _int(seed, "seed")
        if not 0 <= seed < 2**64:
            raise SpecError("seed must fit in 64 bits")
    spec = SuiteSpec(suite=suite, seed=seed)
    if suite == "experiments":
        items = doc.get("experiments")
        if not isinstance(items, list) or not items:
            raise SpecError("an experiments suite needs a non-empty 'experiments' list")
        for item in items:
            if not isinstance(item, dict):
                raise SpecError("each experiment must be an object")
            missing = {"name", "mode", "kind", "dist", "n_grid", "replicates"} - set(item)
            if missing:
                raise SpecError(f"experiment is missing {sorted(missing)}")
            spec.experiments.append(item)
        names = [e["name"] for e in spec.experiments]
        if len(set(names)) != len(names):
            raise SpecError("experiment names must be unique")
    elif suite == "bisym":
        if "n_values" in doc:
            spec.n_values = [_int(n, "n_values entry") for n in doc["n_values"]]
        if "g_grid" in doc:
            spec.g_grid = [float(g) for g in doc["g_grid"]]
    else:
        if "trials" in doc:
            spec.trials = _int(doc["trials"], "trials")
    return spec


def build_experiment(item: dict, seed: int, overrides: dict | None = None) -> ExperimentSpec:
    """ExperimentSpec for one entry, with theory from the moment provider."""
    tolerances = dict(item.get("tolerances", {}))
    tolerances.update(overrides or {})
    try:
        return make_experiment(
            name=str(item["name"]),
            kind=mean_kind_from_dict(item["kind"]),
            dist=distribution_from_dict(item["dist"]),
            mode=str(item["mode"]),
            n_grid=[_int(n, "n_grid entry") for n in item["n_grid"]],
            replicates=_int(item["replicates"], "replicates"),
            seed=seed,
            tolerances=tolerances,
        )
    except SpecError:
        raise
    except GenMeansError as exc:
        raise SpecError(f"experiment {item['name']!r}: {exc}") from None


def load_spec(path) -> SuiteSpec:
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise SpecError(f"{path}: malformed JSON ({exc})") from None
    except OSError as exc:
        raise SpecError(f"{path}: {exc.strerror}") from None
    return parse_spec(doc)


def bundled_spec_path(name: str):
    """Path of a spec shipped inside the package (e.g. 'thm22_explog2.json')."""
    ref = resources.files("genmeans") / "specs" / name
    if not ref.is_file():
        raise SpecError(f"no bundled spec named {name!r}")
    return ref


def bundled_specs() -> list:
    return sorted(p.name for p in (resources.files("genmeans") / "specs").iterdir() if p.name.endswith(".json"))
