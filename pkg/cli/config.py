"""
This module contains the run configuration, read from a TOML file and validated with pydantic.
"""

import logging
import os
import tomllib
from typing import Any, Dict, List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from cli.errors import ConfigFileError
from faults.models import FAULT_KINDS, FaultKind
from gateway.models import ModelSpec
from source_model.models import Quartile
from source_model.utils import QUARTILES, content_hash
from spm.models import MAX_STRENGTH, MIN_STRENGTH

logger = logging.getLogger(__name__)

# keys that change how a run executes but not what it produces
OPERATIONAL_KEYS = {"run_dir", "parallel", "log_level", "base_dir"}


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid")


class CorpusConfig(_Section):
    python: Optional[str] = None
    java: Optional[str] = None


class SeedFilterConfig(_Section):
    min_loc: int = Field(default=50, ge=1)
    max_tokens: int = Field(default=100_000, ge=1)
    chars_per_token: int = Field(default=4, ge=1)


class FaultsConfig(_Section):
    kinds: List[FaultKind] = Field(default_factory=lambda: list(FAULT_KINDS))
    quartiles: List[Quartile] = Field(default_factory=lambda: list(QUARTILES))
    per_combination: int = Field(default=1, ge=1)
    check_kills: bool = True


class SpmConfig(_Section):
    plans: str = "standard"
    strengths: List[int] = Field(
        default_factory=lambda: list(range(MIN_STRENGTH, MAX_STRENGTH + 1))
    )
    quartiles: List[Quartile] = Field(default_factory=lambda: list(QUARTILES))
    content: str = "template"
    verify: bool = False

    @field_validator("strengths")
    @classmethod
    def _check_strengths(cls, strengths: List[int]) -> List[int]:
        for strength in strengths:
            if not MIN_STRENGTH <= strength <= MAX_STRENGTH:
                raise ValueError(f"strength {strength} is outside [{MIN_STRENGTH}, {MAX_STRENGTH}]")
        return sorted(set(strengths))

    @field_validator("content")
    @classmethod
    def _check_content(cls, content: str) -> str:
        if content != "template" and not (content.startswith("model:") and content[6:]):
            raise ValueError(f"content must be 'template' or 'model:<name>', got '{content}'")
        return content


class ExecutionConfig(_Section):
    timeout_s: float = Field(default=10.0, gt=0)
    parallel: int = Field(default=4, ge=1)


class ScoringConfig(_Section):
    tolerance: int = Field(default=0, ge=0)
    exclude_unkilled: bool = False
    longitudinal_pairs: List[Tuple[str, str]] = Field(default_factory=list)


class RunConfig(_Section):
    """
    Every setting of a run. Sections mirror the pipeline stages; `models` holds provider
    profiles and `roster` the models to evaluate (all profiles, or the oracle mock, by default).
    """

    run_dir: str = "runs/default"
    rng_seed: int = 0
    parallel: int = Field(default=4, ge=1)
    log_level: str = "INFO"
    base_dir: str = "."
    roster: Optional[List[str]] = None
    panel: Optional[List[str]] = None
    corpus: CorpusConfig = Field(default_factory=CorpusConfig)
    filter: SeedFilterConfig = Field(default_factory=SeedFilterConfig)
    faults: FaultsConfig = Field(default_factory=FaultsConfig)
    spm: SpmConfig = Field(default_factory=SpmConfig)
    execution: ExecutionConfig = Field(default_factory=ExecutionConfig)
    scoring: ScoringConfig = Field(default_factory=ScoringConfig)
    models: List[ModelSpec] = Field(default_factory=list)

    @property
    def evaluated_models(self) -> List[str]:
        if self.roster:
            return list(self.roster)
        if self.models:
            return [spec.model_name for spec in self.models]
        return ["mock:oracle"]

    @property
    def panel_models(self) -> List[str]:
        return list(self.panel) if self.panel else self.evaluated_models

    @property
    def categories(self) -> Dict[str, Optional[str]]:
        return {spec.model_name: spec.category for spec in self.models}

    def resolve_path(self, path: str) -> str:
        """
        Corpus paths are relative to the directory of the config file.
        """
        return os.path.normpath(os.path.join(self.base_dir, path))

    def snapshot(self) -> Dict[str, Any]:
        return self.model_dump(mode="json")

    def config_hash(self) -> str:
        """
        Identity of the run: every setting except the operational ones.
        """
        return content_hash(self.model_dump(mode="json", exclude=OPERATIONAL_KEYS))


def load_config(path: Optional[str], overrides: Optional[Dict[str, Any]] = None) -> RunConfig:
    """
    Reads `path` (when given) and applies top-level `overrides` whose value is not None.
    """
    data: Dict[str, Any] = {}
    if path is not None:
        try:
            with open(path, "rb") as f:
                data = tomllib.load(f)
        except FileNotFoundError:
            raise ConfigFileError(f"Config file '{path}' does not exist.")
        except tomllib.TOMLDecodeError as e:
            raise ConfigFileError(f"Config file '{path}' is not valid TOML: {e}")
        data.setdefault("base_dir", os.path.dirname(os.path.abspath(path)))
        logger.debug(f"Read config from '{path}'")
    for key, value in (overrides or {}).items():
        if value is not None:
            data[key] = value
    try:
        return RunConfig.model_validate(data)
    except ValidationError as e:
        raise ConfigFileError(f"Invalid configuration: {e}")
