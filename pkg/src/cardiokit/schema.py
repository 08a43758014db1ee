"""Attribute schemas for the questionnaire and UCI heart-disease tables.

A schema is a versioned, self-describing document: one record per attribute
(1-based index, name, categorical codes or numeric kind, missing markers) and
exactly one binary label attribute. The repo ships two documents under
``cardiokit/resources``: ``bhdc`` (the 18-question questionnaire plus label)
and ``uci`` (the 14-column processed heart-disease layout shared by the
Cleveland, Hungarian, Switzerland and Long Beach VA files).
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from importlib import resources as importlib_resources
from pathlib import Path

from .errors import ConfigurationError

SCHEMA_FORMAT = "cardiokit/schema/v1"

CATEGORICAL = "categorical"
NUMERIC = "numeric"


@dataclass(frozen=True)
class AttributeSchema:
    """One attribute of a dataset: its position, kind and value vocabulary."""

    index: int  # 1-based attribute id, also the CSV column position
    name: str
    kind: str  # "categorical" | "numeric"
    categories: tuple[tuple[int, str], ...] = ()
    missing_markers: tuple[str, ...] = ()
    is_label: bool = False

    def __post_init__(self) -> None:
        if self.index < 1:
            raise ConfigurationError(f"attribute index must be 1-based, got {self.index}")
        if self.kind not in (CATEGORICAL, NUMERIC):
            raise ConfigurationError(f"unknown attribute kind {self.kind!r} for {self.name!r}")
        if self.kind == CATEGORICAL:
            codes = [code for code, _ in self.categories]
            if len(set(codes)) != len(codes):
                raise ConfigurationError(f"duplicate category codes in attribute {self.name!r}")
        object.__setattr__(self, "categories", tuple((int(c), str(m)) for c, m in self.categories))
        object.__setattr__(self, "missing_markers", tuple(self.missing_markers))

    @property
    def codes(self) -> tuple[int, ...]:
        return tuple(code for code, _ in self.categories)

    def meaning(self, code: int) -> str:
        for c, m in self.categories:
            if c == code:
                return m
        raise KeyError(code)


@dataclass(frozen=True)
class Schema:
    """An ordered collection of attributes with exactly one binary label."""

    name: str
    attributes: tuple[AttributeSchema, ...]
    version: int = 1
    description: str = ""

    def __post_init__(self) -> None:
        object.__setattr__(self, "attributes", tuple(self.attributes))
        indices = [a.index for a in self.attributes]
        if len(set(indices)) != len(indices):
            raise ConfigurationError(f"schema {self.name!r} has duplicate attribute indices")
        labels = [a for a in self.attributes if a.is_label]
        if len(labels) != 1:
            raise ConfigurationError(
                f"schema {self.name!r} must have exactly one label attribute, found {len(labels)}"
            )
        label = labels[0]
        if label.kind != CATEGORICAL or set(label.codes) != {0, 1}:
            raise ConfigurationError(
                f"label attribute {label.name!r} must be categorical with codes {{0, 1}}"
            )

    @property
    def label(self) -> AttributeSchema:
        return next(a for a in self.attributes if a.is_label)

    @property
    def features(self) -> tuple[AttributeSchema, ...]:
        """Non-label attributes in index order."""
        return tuple(sorted((a for a in self.attributes if not a.is_label), key=lambda a: a.index))

    @property
    def feature_indices(self) -> tuple[int, ...]:
        return tuple(a.index for a in self.features)

    def attribute(self, index: int) -> AttributeSchema:
        for a in self.attributes:
            if a.index == index:
                return a
        raise ConfigurationError(f"schema {self.name!r} has no attribute with index {index}")

    def arity(self) -> int:
        """Number of columns of a raw record, label included."""
        return len(self.attributes)

    def to_document(self) -> dict:
        return {
            "format": SCHEMA_FORMAT,
            "name": self.name,
            "version": self.version,
            "description": self.description,
            "attributes": [
                {
                    "index": a.index,
                    "name": a.name,
                    "kind": a.kind,
                    "categories": [{"code": c, "meaning": m} for c, m in a.categories],
                    "missing_markers": list(a.missing_markers),
                    "is_label": a.is_label,
                }
                for a in self.attributes
            ],
        }

    def fingerprint(self) -> str:
        """SHA-256 over the canonical JSON form; pins models to their schema."""
        canonical = json.dumps(self.to_document(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()

    @classmethod
    def from_document(cls, doc: dict) -> "Schema":
        if doc.get("format") != SCHEMA_FORMAT:
            raise ConfigurationError(f"unsupported schema format {doc.get('format')!r}")
        attributes = tuple(
            AttributeSchema(
                index=entry["index"],
                name=entry["name"],
                kind=entry["kind"],
                categories=tuple((c["code"], c["meaning"]) for c in entry.get("categories", ())),
                missing_markers=tuple(entry.get("missing_markers", ())),
                is_label=entry.get("is_label", False),
            )
            for entry in doc["attributes"]
        )
        return cls(
            name=doc["name"],
            attributes=attributes,
            version=doc.get("version", 1),
            description=doc.get("description", ""),
        )


def _resource_text(filename: str) -> str:
    return importlib_resources.files("cardiokit.resources").joinpath(filename).read_text("utf-8")


def builtin_schema_names() -> tuple[str, ...]:
    return ("bhdc", "uci")


def load_schema(name_or_path: str | Path) -> Schema:
    """Load a schema by built-in name ("bhdc", "uci") or from a JSON file."""
    name = str(name_or_path)
    if name in builtin_schema_names():
        return Schema.from_document(json.loads(_resource_text(f"{name}.json")))
    path = Path(name_or_path)
    if not path.exists():
        raise ConfigurationError(
            f"unknown schema {name!r}: not a built-in ({', '.join(builtin_schema_names())}) "
            f"and no such file"
        )
    try:
        return Schema.from_document(json.loads(path.read_text("utf-8")))
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigurationError(f"cannot read schema file {path}: {exc}") from exc


def uci_raw_index_map() -> dict[int, int]:
    """Raw 76-attribute file indices -> processed 14-column positions."""
    raw = json.loads(_resource_text("uci_raw_index_map.json"))
    return {int(k): int(v) for k, v in raw["map"].items()}
