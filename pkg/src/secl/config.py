"""Training configuration: dataclass, INI-style config files, bundled presets."""

from __future__ import annotations

import configparser
import hashlib
import json
from dataclasses import asdict, dataclass, field
from importlib import resources
from pathlib import Path

from .errors import ConfigError
from .losses import ABLATIONS, DENSE_SIMILARITY_CAP


@dataclass
class TrainConfig:
    dataset: str = "unnamed"
    edges: str = ""
    attributes: str = ""
    labels: str | None = None
    clusters: int = 2

    r: int = 3
    tau: float = 0.1
    structure_widths: list[int] = field(default_factory=lambda: [500])
    attribute_widths: list[int] = field(default_factory=lambda: [500])
    activation: str = "tanh"

    learning_rate: float = 1e-3
    lambda1: float = 0.1
    lambda2: float = 1.0
    epochs: int = 400
    seed: int = 0
    runs: int = 10
    ablation: str = "full"
    dense_cap: int = DENSE_SIMILARITY_CAP
    deterministic: bool = False

    kmeans_restarts: int = 10
    kmeans_max_iter: int = 300

    def validate(self) -> "TrainConfig":
        if self.tau <= 0:
            raise ConfigError(f"tau must be positive, got {self.tau}")
        if self.lambda1 < 0 or self.lambda2 < 0:
            raise ConfigError("lambda1 and lambda2 must be non-negative")
        if self.epochs < 1:
            raise ConfigError(f"epochs must be >= 1, got {self.epochs}")
        if self.runs < 1:
            raise ConfigError(f"runs must be >= 1, got {self.runs}")
        if self.r < 0:
            raise ConfigError(f"r must be >= 0, got {self.r}")
        if self.ablation not in ABLATIONS:
            raise ConfigError(
                f"ablation must be one of {ABLATIONS}, got {self.ablation!r}"
            )
        if self.clusters < 1:
            raise ConfigError(f"clusters must be >= 1, got {self.clusters}")
        return self

    def snapshot(self) -> dict:
        return asdict(self)

    def digest(self) -> str:
        payload = json.dumps(self.snapshot(), sort_keys=True).encode()
        return hashlib.sha256(payload).hexdigest()[:12]


def _parse_widths(text: str) -> list[int]:
    try:
        return [int(tok) for tok in text.replace(",", " ").split()]
    except ValueError:
        raise ConfigError(f"bad layer widths {text!r}")


def load_config(path, overrides: dict | None = None, data_root=None) -> TrainConfig:
    """Read a key = value config file.

    Relative dataset paths resolve against `data_root` when given (the case
    for bundled configs), otherwise against the config file's directory.
    """
    path = Path(path)
    parser = configparser.ConfigParser()
    read = parser.read(path)
    if not read:
        raise ConfigError(f"config file not found: {path}")
    base = Path(data_root) if data_root is not None else path.parent
    cfg = TrainConfig()

    def get(section, key, default=None):
        if parser.has_option(section, key):
            return parser.get(section, key)
        return default

    cfg.dataset = get("dataset", "name", cfg.dataset)
    for attr, key in (("edges", "edges"), ("attributes", "attributes")):
        val = get("dataset", key)
        if val:
            setattr(cfg, attr, str((base / val).resolve()))
    lab = get("dataset", "labels")
    cfg.labels = str((base / lab).resolve()) if lab else None
    cfg.clusters = int(get("dataset", "clusters", cfg.clusters))

    cfg.r = int(get("model", "r", cfg.r))
    cfg.tau = float(get("model", "tau", cfg.tau))
    sw = get("model", "structure_widths")
    aw = get("model", "attribute_widths")
    if sw:
        cfg.structure_widths = _parse_widths(sw)
    if aw:
        cfg.attribute_widths = _parse_widths(aw)
    cfg.activation = get("model", "activation", cfg.activation)

    cfg.learning_rate = float(get("training", "learning_rate", cfg.learning_rate))
    cfg.lambda1 = float(get("training", "lambda1", cfg.lambda1))
    cfg.lambda2 = float(get("training", "lambda2", cfg.lambda2))
    cfg.epochs = int(get("training", "epochs", cfg.epochs))
    cfg.seed = int(get("training", "seed", cfg.seed))
    cfg.runs = int(get("training", "runs", cfg.runs))
    cfg.ablation = get("training", "ablation", cfg.ablation)
    cfg.dense_cap = int(get("training", "dense_cap", cfg.dense_cap))
    det = get("training", "deterministic")
    if det is not None:
        cfg.deterministic = det.strip().lower() in ("1", "true", "yes", "on")

    cfg.kmeans_restarts = int(get("kmeans", "restarts", cfg.kmeans_restarts))
    cfg.kmeans_max_iter = int(get("kmeans", "max_iter", cfg.kmeans_max_iter))

    for key, value in (overrides or {}).items():
        if value is None:
            continue
        if not hasattr(cfg, key):
            raise ConfigError(f"unknown config field {key!r}")
        setattr(cfg, key, value)
    return cfg.validate()


def bundled_config_names() -> list[str]:
    files = resources.files("secl") / "configs"
    return sorted(p.name[: -len(".cfg")] for p in files.iterdir() if p.name.endswith(".cfg"))


def bundled_config_path(name: str) -> Path:
    p = resources.files("secl") / "configs" / f"{name}.cfg"
    if not p.is_file():
        raise ConfigError(
            f"no bundled config {name!r}; available: {bundled_config_names()}"
        )
    return Path(str(p))
