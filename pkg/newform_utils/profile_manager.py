import json
import os
from typing import Any, Dict, List, Literal, Optional

from pydantic import BaseModel, Field, ValidationError, field_validator, model_validator

from newform_utils.errors import DomainError
from newform_utils.quadrature import QuadratureSpec, Scheme

try:
    import json5
except Exception:
    json5 = None

Identity = Literal[
    "tate",
    "gj",
    "gj_contragredient",
    "rs_21",
    "rs_22",
    "rs_32",
    "rs_32_direct",
    "pieri",
    "hecke",
    "reproducing",
    "whittaker_oracle",
    "propagation",
    "epsilon_fourier",
    "oldform",
    "multiplicity_one",
    "binom",
]


class QuadratureSettings(BaseModel):
    scheme: Scheme = Scheme.DOUBLE_EXPONENTIAL
    level: int = Field(4, ge=1, le=9)
    max_level: int = Field(9, ge=1, le=12)
    tolerance: float = Field(1e-10, gt=0)
    abs_tolerance: float = Field(1e-14, gt=0)
    points: int = Field(32, ge=4, le=256)
    samples: int = Field(20000, ge=100)
    angular_points: int = Field(16, ge=1, le=256)
    panels: int = Field(24, ge=4, le=400)
    budget: Optional[int] = Field(None, gt=0)

    @model_validator(mode="after")
    def _levels(self) -> "QuadratureSettings":
        if self.max_level < self.level:
            raise ValueError("max_level must not be below level")
        return self

    def to_spec(self, seed: int, budget: int) -> QuadratureSpec:
        return QuadratureSpec(
            scheme=self.scheme,
            level=self.level,
            max_level=self.max_level,
            tolerance=self.tolerance,
            abs_tolerance=self.abs_tolerance,
            points=self.points,
            samples=self.samples,
            seed=seed,
            angular_points=self.angular_points,
            panels=self.panels,
            budget=self.budget or budget,
        )


class CheckConfig(BaseModel):
    """One identity to verify.

    ``descriptor`` is the representation under test; ``twist`` the second
    (spherical) representation for Rankin-Selberg checks. ``s_grid`` holds
    complex numbers in descriptor syntax, ``points`` evaluation points
    (each a list of coordinates) for pointwise checks, ``params`` anything
    else a check needs (field, rank and degrees for harmonic checks).
    """

    identity: Identity
    descriptor: Optional[str] = None
    twist: Optional[str] = None
    s_grid: List[str] = Field(default_factory=list)
    points: List[List[str]] = Field(default_factory=list)
    params: Dict[str, Any] = Field(default_factory=dict)
    tolerance: float = Field(1e-8, gt=0)
    relative: bool = False
    quadrature: Optional[QuadratureSettings] = None
    label: Optional[str] = None

    @property
    def name(self) -> str:
        return self.label or self.identity


class CliConfig(BaseModel):
    profile: str = "fast"
    seed: int = 20240611
    budget: int = Field(2_000_000, gt=0)
    workers: int = Field(default_factory=lambda: int(os.getenv("NEWFORM_WORKERS", "4")), ge=1, le=64)
    output: Literal["text", "json"] = "text"
    tolerance_overrides: Dict[str, float] = Field(default_factory=dict)
    quadrature: QuadratureSettings = Field(default_factory=QuadratureSettings)
    checks: List[CheckConfig] = Field(default_factory=list)

    @field_validator("tolerance_overrides")
    @classmethod
    def _positive(cls, value: Dict[str, float]) -> Dict[str, float]:
        for key, tol in value.items():
            if not tol > 0:
                raise ValueError(f"tolerance override for {key!r} must be > 0")
        return value

    def tolerance_for(self, check: CheckConfig) -> float:
        return self.tolerance_overrides.get(check.name, self.tolerance_overrides.get(check.identity, check.tolerance))

    def spec_for(self, check: CheckConfig) -> QuadratureSpec:
        return (check.quadrature or self.quadrature).to_spec(self.seed, self.budget)


def _loads(text: str) -> Dict[str, Any]:
    try:
        return json.loads(text)
    except Exception:
        if json5 is not None:
            return json5.loads(text)
        raise


class ProfileManager:
    def __init__(self, profile_dir: str = "profiles"):
        self.profile_dir = profile_dir
        self.override_dir = os.path.join(self.profile_dir, "overrides")

    def _path(self, name: str) -> str:
        return os.path.join(self.profile_dir, f"{name}.json")

    def _override_path(self, name: str) -> str:
        return os.path.join(self.override_dir, f"{name}.json")

    def has_profile(self, name: str) -> bool:
        return os.path.exists(self._path(name))

    def available(self) -> List[str]:
        if not os.path.isdir(self.profile_dir):
            return []
        return sorted(f[:-5] for f in os.listdir(self.profile_dir) if f.endswith(".json"))

    def _deep_merge(self, a: Dict[str, Any], b: Dict[str, Any]) -> Dict[str, Any]:
        out = dict(a)
        for k, v in b.items():
            if isinstance(v, dict) and isinstance(out.get(k), dict):
                out[k] = self._deep_merge(out[k], v)
            else:
                out[k] = v
        return out

    def load_raw(self, name: str) -> Dict[str, Any]:
        path = self._path(name)
        if not os.path.exists(path):
            raise DomainError(f"unknown profile {name!r}; available: {', '.join(self.available()) or 'none'}")
        with open(path, "r", encoding="utf-8") as rf:
            base = _loads(rf.read())
        ov_path = self._override_path(name)
        if os.path.exists(ov_path):
            with open(ov_path, "r", encoding="utf-8") as rf:
                base = self._deep_merge(base, _loads(rf.read()))
        return base

    def load_profile(self, name: str, **cli_overrides: Any) -> CliConfig:
        """Profile file + override file + non-None command-line values, validated."""
        data = self.load_raw(name)
        data["profile"] = name
        data = self._deep_merge(data, {k: v for k, v in cli_overrides.items() if v is not None})
        try:
            return CliConfig.model_validate(data)
        except ValidationError as exc:
            raise DomainError(f"invalid profile {name!r}: {exc}") from None

    def save_override(self, name: str, data: Dict[str, Any]) -> None:
        os.makedirs(self.override_dir, exist_ok=True)
        with open(self._override_path(name), "w", encoding="utf-8") as wf:
            json.dump(data, wf, ensure_ascii=False, indent=2)

    def load_override(self, name: str) -> Dict[str, Any]:
        path = self._override_path(name)
        if os.path.exists(path):
            with open(path, "r", encoding="utf-8") as rf:
                return _loads(rf.read())
        return {}

    def remove_override(self, name: str) -> None:
        path = self._override_path(name)
        if os.path.exists(path):
            os.remove(path)
