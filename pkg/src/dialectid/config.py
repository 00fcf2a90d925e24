"""Declarative experiment configuration (TOML) with flag overrides."""
from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .classifier import Hyperparams
from .fmx import FeatureKind
from .pooling import Pooling, default_normalization
from .splits import DEFAULT_SEEDS

RUN_KINDS = (FeatureKind.FB40, FeatureKind.MFCC39, FeatureKind.PROSODY, FeatureKind.EMBEDDING)


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ClassifierSettings:
    layer_sizes: tuple[int, ...] = (256, 128, 64, 32)
    dropout_p: float = 0.1
    activation: str = "relu"


@dataclass(frozen=True)
class ExperimentConfig:
    manifest: str
    features_dir: str
    out_dir: str
    feature_kind: FeatureKind = FeatureKind.PROSODY
    pooling: Pooling = Pooling.MEANSTD
    normalize: bool | None = None  # None: follow the per-feature default
    norm_stats: str = "all"  # "all" utterances of a speaker, or "train" only
    split_mode: str = "SI"
    seeds: tuple[int, ...] = DEFAULT_SEEDS
    model: ClassifierSettings = field(default_factory=ClassifierSettings)
    train: Hyperparams = field(default_factory=Hyperparams)

    def __post_init__(self):
        object.__setattr__(self, "feature_kind", FeatureKind(self.feature_kind))
        object.__setattr__(self, "pooling", Pooling(self.pooling))
        object.__setattr__(self, "seeds", tuple(int(s) for s in self.seeds))
        if self.feature_kind not in RUN_KINDS:
            raise ConfigError(f"feature_kind must be one of {[k.value for k in RUN_KINDS]}")
        if not self.seeds:
            raise ConfigError("seeds must not be empty")
        if self.split_mode not in ("SD", "SI"):
            raise ConfigError(f"split_mode must be SD or SI, got {self.split_mode!r}")
        if self.norm_stats not in ("all", "train"):
            raise ConfigError("norm_stats must be 'all' or 'train'")

    @property
    def apply_normalization(self) -> bool:
        if self.normalize is None:
            return default_normalization(self.feature_kind)
        return self.normalize

    def to_dict(self) -> dict:
        d = asdict(self)
        d["feature_kind"] = self.feature_kind.value
        d["pooling"] = self.pooling.value
        d["seeds"] = list(self.seeds)
        d["model"]["layer_sizes"] = list(self.model.layer_sizes)
        d["apply_normalization"] = self.apply_normalization
        return d

    def hash(self) -> str:
        """Hash of everything that affects results (paths and seeds excluded)."""
        d = self.to_dict()
        for k in ("manifest", "features_dir", "out_dir", "seeds", "normalize"):
            d.pop(k)
        blob = json.dumps(d, sort_keys=True).encode("utf-8")
        return hashlib.sha256(blob).hexdigest()[:16]


def _normalize_value(v):
    if v is None or isinstance(v, bool):
        return v
    s = str(v).lower()
    if s == "auto":
        return None
    if s in ("on", "true", "yes", "1"):
        return True
    if s in ("off", "false", "no", "0"):
        return False
    raise ConfigError(f"normalize must be auto/on/off, got {v!r}")


def from_mapping(data: dict, base_dir: Path | None = None) -> ExperimentConfig:
    data = dict(data)
    known = {f.name for f in fields(ExperimentConfig)}
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"unknown config key(s): {sorted(unknown)}")
    try:
        model = ClassifierSettings(**data.pop("model", {}))
        train = Hyperparams(**data.pop("train", {}))
    except TypeError as exc:
        raise ConfigError(str(exc)) from None
    model = replace(model, layer_sizes=tuple(model.layer_sizes))
    if "normalize" in data:
        data["normalize"] = _normalize_value(data["normalize"])
    for key in ("manifest", "features_dir", "out_dir"):
        if key not in data:
            raise ConfigError(f"missing required config key {key!r}")
        if base_dir is not None and not Path(data[key]).is_absolute():
            data[key] = str(base_dir / data[key])
    try:
        return ExperimentConfig(model=model, train=train, **data)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None


def load_config(path, overrides: dict | None = None) -> ExperimentConfig:
    """Read a TOML config; ``overrides`` (already-parsed flag values) win."""
    path = Path(path)
    with open(path, "rb") as fh:
        data = tomllib.load(fh)
    for key, value in (overrides or {}).items():
        if value is None:
            continue
        if key in ("lr", "epochs", "batch_size"):
            data.setdefault("train", {})[key] = value
        else:
            data[key] = value
    return from_mapping(data, base_dir=path.parent)
