"""Scenario files: one JSON document describing a team model and its
information structure.

Layout (see ``schemas/scenario.schema.json`` for the authoritative
schema):

* ``states`` is a flat label list; ``actions`` and ``observations`` hold
  one label list per member;
* ``transition`` is indexed ``[x][joint_u][x']`` with the joint action
  flattened row-major in member order (member K varies fastest);
* ``observation_kernels`` is indexed ``[member][x][y]``;
* ``stage_cost`` is indexed ``[t][x][joint_u]``; ``terminal_cost`` by x;
* ``information_structure`` carries ``variant`` plus ``delays`` (delayed
  variants) or ``period`` (periodic sharing).

Structural problems (bad JSON, schema violations, ragged arrays) raise
:class:`ScenarioFormatError`; numeric invariants such as rows summing to
one are the business of :func:`teamdp.model.validate_model`.
"""

from __future__ import annotations

import json
from importlib import resources

import jsonschema
import numpy as np

from .errors import ScenarioFormatError
from .model import InformationStructure, TeamModel

__all__ = [
    "load_schema",
    "load_scenario",
    "scenario_from_dict",
    "scenario_to_dict",
]

_SCHEMAS = {}


def load_schema(name: str) -> dict:
    """Load a schema shipped with the package ("scenario" or "report")."""
    if name not in _SCHEMAS:
        path = resources.files("teamdp").joinpath("schemas", f"{name}.schema.json")
        _SCHEMAS[name] = json.loads(path.read_text())
    return _SCHEMAS[name]


def scenario_from_dict(doc: dict) -> tuple[TeamModel, InformationStructure]:
    """Build the model and structure from a parsed scenario document.

    Raises ScenarioFormatError when the document does not match the
    scenario schema or its arrays are ragged.
    """
    validator = jsonschema.Draft202012Validator(load_schema("scenario"))
    errors = sorted(validator.iter_errors(doc), key=lambda e: list(e.absolute_path))
    if errors:
        e = errors[0]
        where = "/".join(str(p) for p in e.absolute_path) or "<root>"
        raise ScenarioFormatError(f"scenario schema violation at {where}: {e.message}")
    try:
        model = TeamModel(
            num_members=int(doc["num_members"]),
            horizon=int(doc["horizon"]),
            states=tuple(doc["states"]),
            actions=tuple(tuple(a) for a in doc["actions"]),
            observations=tuple(tuple(o) for o in doc["observations"]),
            initial_dist=np.asarray(doc["initial_dist"], dtype=float),
            transition=np.asarray(doc["transition"], dtype=float),
            observation_kernels=tuple(
                np.asarray(k, dtype=float) for k in doc["observation_kernels"]
            ),
            stage_cost=np.asarray(doc["stage_cost"], dtype=float),
            terminal_cost=np.asarray(doc["terminal_cost"], dtype=float),
        )
    except (ValueError, TypeError) as e:
        raise ScenarioFormatError(f"malformed scenario arrays: {e}") from e
    s = doc["information_structure"]
    structure = InformationStructure(
        variant=s["variant"],
        delays=tuple(s["delays"]) if "delays" in s else None,
        period=s.get("period"),
    )
    return model, structure


def load_scenario(path) -> tuple[TeamModel, InformationStructure]:
    """Read and parse a scenario file.

    Raises ScenarioFormatError for unreadable files, invalid JSON, or
    schema violations.
    """
    try:
        with open(path, "rb") as f:
            raw = f.read()
    except OSError as e:
        raise ScenarioFormatError(f"cannot read scenario file {path}: {e}") from e
    try:
        doc = json.loads(raw)
    except json.JSONDecodeError as e:
        raise ScenarioFormatError(f"scenario file {path} is not valid JSON: {e}") from e
    if not isinstance(doc, dict):
        raise ScenarioFormatError(f"scenario file {path} must hold a JSON object")
    return scenario_from_dict(doc)


def scenario_to_dict(
    model: TeamModel,
    structure: InformationStructure,
    name: str | None = None,
    description: str | None = None,
) -> dict:
    """Serialize a model and structure back into the scenario layout."""
    doc: dict = {}
    if name is not None:
        doc["name"] = name
    if description is not None:
        doc["description"] = description
    doc.update(
        {
            "num_members": model.num_members,
            "horizon": model.horizon,
            "states": list(model.states),
            "actions": [list(a) for a in model.actions],
            "observations": [list(o) for o in model.observations],
            "initial_dist": [float(p) for p in model.initial_dist],
            "transition": model.transition.tolist(),
            "observation_kernels": [k.tolist() for k in model.observation_kernels],
            "stage_cost": model.stage_cost.tolist(),
            "terminal_cost": [float(v) for v in model.terminal_cost],
            "information_structure": _structure_dict(structure),
        }
    )
    return doc


def _structure_dict(structure: InformationStructure) -> dict:
    d: dict = {"variant": structure.variant}
    if structure.delays is not None:
        d["delays"] = list(structure.delays)
    if structure.period is not None:
        d["period"] = structure.period
    return d
