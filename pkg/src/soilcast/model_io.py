"""Versioned JSON model files: pipeline descriptor, schema snapshot and model body."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .dataset import AttributeSpec, Dataset
from .learners import Pipeline
from .tree import Classifier, MajorityModel, TreeModel

FORMAT_VERSION = 1


class ModelFormatError(ValueError):
    """Raised for unreadable or truncated model files."""


class UnsupportedVersionError(ModelFormatError):
    pass


def model_to_dict(model: Classifier) -> dict:
    return model.to_dict()


def model_from_dict(obj: dict) -> Classifier:
    from .adaboost import BoostedEnsemble
    from .cfs import AttributeSelectedModel

    kinds = {"tree": TreeModel, "majority": MajorityModel, "boosted": BoostedEnsemble,
             "attribute_selected": AttributeSelectedModel}
    try:
        cls = kinds[obj["type"]]
    except KeyError:
        raise ModelFormatError(f"unknown model type {obj.get('type')!r}") from None
    return cls.from_dict(obj)


@dataclass
class ModelFile:
    pipeline: Pipeline
    attributes: tuple[AttributeSpec, ...]
    class_index: int
    model: Classifier

    @classmethod
    def for_dataset(cls, pipeline: Pipeline, d: Dataset, model: Classifier) -> "ModelFile":
        return cls(pipeline, d.attributes, d.class_index, model)

    @property
    def class_values(self) -> tuple[str, ...]:
        return self.attributes[self.class_index].nominal_values

    def to_dict(self) -> dict:
        return {"format_version": FORMAT_VERSION, "pipeline": self.pipeline.to_dict(),
                "schema": {"attributes": [a.to_dict() for a in self.attributes],
                           "class_index": self.class_index},
                "model": model_to_dict(self.model)}

    @classmethod
    def from_dict(cls, obj: dict) -> "ModelFile":
        version = obj.get("format_version")
        if version != FORMAT_VERSION:
            raise UnsupportedVersionError(f"unsupported model format version {version!r} "
                                          f"(this build reads version {FORMAT_VERSION})")
        try:
            attrs = tuple(AttributeSpec.from_dict(a) for a in obj["schema"]["attributes"])
            return cls(Pipeline.from_dict(obj["pipeline"]), attrs, obj["schema"]["class_index"],
                       model_from_dict(obj["model"]))
        except (KeyError, TypeError) as exc:
            raise ModelFormatError(f"malformed model file: missing or invalid field {exc}") from None


def save_model(model: ModelFile, path) -> None:
    text = json.dumps(model.to_dict(), allow_nan=False, separators=(",", ":"))
    Path(path).write_text(text + "\n", encoding="utf-8")


def load_model(path) -> ModelFile:
    text = Path(path).read_text(encoding="utf-8")
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        offset = len(text[:exc.pos].encode("utf-8"))
        raise ModelFormatError(f"{path}: cannot parse model file at byte {offset}: {exc.msg}") from None
    if not isinstance(obj, dict):
        raise ModelFormatError(f"{path}: model file must hold a JSON object")
    return ModelFile.from_dict(obj)
