"""Collapse ontology-specific argument roles onto the generic
{Actor, Place, Time} label set so one argument model serves unseen event
types. Adjudicator counts as Actor only for the five court-outcome event
types; everything else outside the list is unmapped and trains as NONE.
"""
from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from .distsup import ArgumentCandidate, NONE_LABEL

ACTOR = "Actor"
PLACE = "Place"
TIME = "Time"
GENERIC_ROLES = (ACTOR, PLACE, TIME)

DEFAULT_ACTOR_ROLES = frozenset({
    "Person", "Agent", "Victim", "Artifact", "Buyer", "Seller", "Giver",
    "Recipient", "Org", "Attacker", "Target", "Entity", "Defendant",
    "Prosecutor", "Plaintiff",
})
DEFAULT_ADJUDICATOR_EVENT_TYPES = frozenset({
    "Convict", "Sentence", "Fine", "Acquit", "Pardon",
})


@dataclass(frozen=True)
class RoleMapping:
    actor_roles: frozenset[str] = DEFAULT_ACTOR_ROLES
    adjudicator_event_types: frozenset[str] = DEFAULT_ADJUDICATOR_EVENT_TYPES

    @classmethod
    def from_file(cls, path: str | Path) -> "RoleMapping":
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
        return cls(
            actor_roles=frozenset(data.get("actor_roles", DEFAULT_ACTOR_ROLES)),
            adjudicator_event_types=frozenset(
                data.get("adjudicator_event_types", DEFAULT_ADJUDICATOR_EVENT_TYPES)
            ),
        )

    def to_json(self) -> dict:
        return {
            "actor_roles": sorted(self.actor_roles),
            "adjudicator_event_types": sorted(self.adjudicator_event_types),
        }


def map_role(role: str, event_type: str,
             mapping: RoleMapping = RoleMapping()) -> str | None:
    """Total function: Actor-like roles collapse to Actor, Place and Time
    pass through, anything else returns None (unmapped)."""
    if role in mapping.actor_roles:
        return ACTOR
    if role == "Adjudicator" and event_type in mapping.adjudicator_event_types:
        return ACTOR
    if role in (PLACE, TIME):
        return role
    return None


def map_generic(role: str, event_type: str,
                mapping: RoleMapping = RoleMapping()) -> str | None:
    """map_role with the generic labels as fixed points, so already-mapped
    data passes through unchanged (mapping is idempotent)."""
    if role in GENERIC_ROLES:
        return role
    return map_role(role, event_type, mapping)


def map_dataset(
    candidates: Sequence[ArgumentCandidate],
    mapping: RoleMapping = RoleMapping(),
) -> tuple[list[ArgumentCandidate], Counter]:
    """Rewrite every candidate's gold role through map_role. Unmapped roles
    become NONE so the candidates stay usable as negatives; the count of
    each output label is returned for reporting."""
    out: list[ArgumentCandidate] = []
    distribution: Counter = Counter()
    for cand in candidates:
        label = cand.label
        if label is not None and label != NONE_LABEL:
            label = map_generic(label, cand.event_type, mapping) or NONE_LABEL
        data = cand.to_json()
        data.pop("kind")
        data["label"] = label
        out.append(ArgumentCandidate(**data))
        distribution[label if label is not None else "<unset>"] += 1
    return out, distribution
