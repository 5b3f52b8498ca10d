"""Kinematic and dynamic description of a revolute serial chain.

A robot is stored as an immutable :class:`RobotModel` holding one
:class:`LinkSpec` and one :class:`JointLimits` per joint. Models are read
from and written to a strict JSON schema::

    {
      "joints": [
        {"length": 0.3, "mass": 1.0, "com_offset": 0.15, "inertia_zz": 0.01,
         "axis": [0, 0, 1], "q_min": -3.14, "q_max": 3.14,
         "v_max": 2.0, "a_max": 5.0},
        ...
      ],
      "gravity": [0, 0, -9.81]
    }

All quantities are SI. Unknown keys are rejected.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import cached_property
from importlib import resources
from pathlib import Path

import numpy as np

from .errors import ParseError, ValidationError

DEFAULT_GRAVITY = (0.0, 0.0, -9.81)

_JOINT_KEYS = (
    "length",
    "mass",
    "com_offset",
    "inertia_zz",
    "axis",
    "q_min",
    "q_max",
    "v_max",
    "a_max",
)
_TOP_KEYS = ("joints", "gravity")


def _finite(field: str, value) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ValidationError(field, f"expected a number, got {value!r}")
    value = float(value)
    if not math.isfinite(value):
        raise ValidationError(field, "must be finite")
    return value


def _vector3(field: str, value) -> tuple[float, float, float]:
    if not isinstance(value, (list, tuple)) or len(value) != 3:
        raise ValidationError(field, f"expected 3 numbers, got {value!r}")
    return tuple(_finite(f"{field}[{i}]", v) for i, v in enumerate(value))


@dataclass(frozen=True)
class LinkSpec:
    """One rigid link and the revolute joint that drives it.

    The link extends ``length`` metres along its local x axis from the joint.
    Its mass sits at ``com_offset`` along that axis and ``inertia_zz`` is the
    rotational inertia about the centre of mass, taken about an axis parallel
    to ``joint_axis``.
    """

    length: float
    mass: float
    com_offset: float
    inertia_zz: float
    joint_axis: tuple[float, float, float] = (0.0, 0.0, 1.0)

    def validate(self, prefix: str = "link") -> None:
        if self.length < 0:
            raise ValidationError(f"{prefix}.length", "must be >= 0")
        if self.mass <= 0:
            raise ValidationError(f"{prefix}.mass", "must be > 0")
        if not 0 <= self.com_offset <= self.length:
            raise ValidationError(f"{prefix}.com_offset", "must lie in [0, length]")
        if self.inertia_zz < 0:
            raise ValidationError(f"{prefix}.inertia_zz", "must be >= 0")
        if abs(math.sqrt(sum(a * a for a in self.joint_axis)) - 1.0) > 1e-9:
            raise ValidationError(f"{prefix}.axis", "must have unit norm")


@dataclass(frozen=True)
class JointLimits:
    q_min: float
    q_max: float
    v_max: float
    a_max: float

    def validate(self, prefix: str = "joint") -> None:
        if not self.q_min < self.q_max:
            raise ValidationError(f"{prefix}.q_min", "q_min must be < q_max")
        if self.v_max <= 0:
            raise ValidationError(f"{prefix}.v_max", "v_max must be > 0")
        if self.a_max <= 0:
            raise ValidationError(f"{prefix}.a_max", "a_max must be > 0")


@dataclass(frozen=True)
class RobotModel:
    """Immutable serial-chain description; see the module docstring for the file schema."""

    links: tuple[LinkSpec, ...]
    limits: tuple[JointLimits, ...]
    gravity: tuple[float, float, float] = DEFAULT_GRAVITY

    def __post_init__(self):
        object.__setattr__(self, "links", tuple(self.links))
        object.__setattr__(self, "limits", tuple(self.limits))
        object.__setattr__(self, "gravity", tuple(float(g) for g in self.gravity))
        self.validate()

    def validate(self) -> None:
        if len(self.links) < 1:
            raise ValidationError("joints", "at least one joint is required")
        if len(self.links) != len(self.limits):
            raise ValidationError("joints", "links and limits differ in length")
        for i, (link, lim) in enumerate(zip(self.links, self.limits)):
            link.validate(f"joints[{i}]")
            lim.validate(f"joints[{i}]")
        if len(self.gravity) != 3 or not all(math.isfinite(g) for g in self.gravity):
            raise ValidationError("gravity", "must be 3 finite numbers")

    @property
    def n_joints(self) -> int:
        return len(self.links)

    @cached_property
    def v_max(self) -> np.ndarray:
        return np.array([lim.v_max for lim in self.limits])

    @cached_property
    def a_max(self) -> np.ndarray:
        return np.array([lim.a_max for lim in self.limits])

    @cached_property
    def q_min(self) -> np.ndarray:
        return np.array([lim.q_min for lim in self.limits])

    @cached_property
    def q_max(self) -> np.ndarray:
        return np.array([lim.q_max for lim in self.limits])

    def to_dict(self) -> dict:
        joints = []
        for link, lim in zip(self.links, self.limits):
            joints.append(
                {
                    "length": link.length,
                    "mass": link.mass,
                    "com_offset": link.com_offset,
                    "inertia_zz": link.inertia_zz,
                    "axis": list(link.joint_axis),
                    "q_min": lim.q_min,
                    "q_max": lim.q_max,
                    "v_max": lim.v_max,
                    "a_max": lim.a_max,
                }
            )
        return {"joints": joints, "gravity": list(self.gravity)}

    @classmethod
    def from_dict(cls, data) -> RobotModel:
        if not isinstance(data, dict):
            raise ValidationError("robot", "top level must be a JSON object")
        unknown = sorted(set(data) - set(_TOP_KEYS))
        if unknown:
            raise ValidationError(unknown[0], "unknown key")
        if "joints" not in data:
            raise ValidationError("joints", "missing")
        joints = data["joints"]
        if not isinstance(joints, list) or not joints:
            raise ValidationError("joints", "must be a non-empty array")
        gravity = _vector3("gravity", data.get("gravity", list(DEFAULT_GRAVITY)))

        links, limits = [], []
        for i, entry in enumerate(joints):
            prefix = f"joints[{i}]"
            if not isinstance(entry, dict):
                raise ValidationError(prefix, "must be an object")
            unknown = sorted(set(entry) - set(_JOINT_KEYS))
            if unknown:
                raise ValidationError(f"{prefix}.{unknown[0]}", "unknown key")
            missing = [k for k in _JOINT_KEYS if k not in entry]
            if missing:
                raise ValidationError(f"{prefix}.{missing[0]}", "missing")
            num = {k: _finite(f"{prefix}.{k}", entry[k]) for k in _JOINT_KEYS if k != "axis"}
            links.append(
                LinkSpec(
                    length=num["length"],
                    mass=num["mass"],
                    com_offset=num["com_offset"],
                    inertia_zz=num["inertia_zz"],
                    joint_axis=_vector3(f"{prefix}.axis", entry["axis"]),
                )
            )
            limits.append(JointLimits(num["q_min"], num["q_max"], num["v_max"], num["a_max"]))
        return cls(tuple(links), tuple(limits), gravity)

    def with_gravity(self, gravity) -> RobotModel:
        return RobotModel(self.links, self.limits, tuple(gravity))


def load_robot(path) -> RobotModel:
    """Read and validate a robot JSON file.

    Raises:
        ParseError: the file is missing or is not valid JSON.
        ValidationError: the content breaks the schema or a model invariant.
    """
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ParseError(f"cannot read robot file {path}: {exc.strerror}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"malformed robot file {path}: {exc}") from exc
    return RobotModel.from_dict(data)


def save_robot(model: RobotModel, path) -> None:
    Path(path).write_text(json.dumps(model.to_dict(), indent=2) + "\n")


def default_seven_dof() -> RobotModel:
    """The bundled 7-joint lab arm used by examples and acceptance tests."""
    raw = resources.files("trajenergy").joinpath("data/seven_dof.json").read_text()
    return RobotModel.from_dict(json.loads(raw))


def seven_dof_dict() -> dict:
    """Parameters of the bundled arm, as written to ``data/seven_dof.json``.

    Axes alternate between z and y so gravity loads the pitch joints;
    at q = 0 every link lies along +x.
    """
    axes = [(0.0, 0.0, 1.0), (0.0, 1.0, 0.0)] * 3 + [(0.0, 0.0, 1.0)]
    joints = [
        {
            "length": 0.3,
            "mass": 1.0,
            "com_offset": 0.15,
            "inertia_zz": 0.01,
            "axis": list(axis),
            "q_min": -math.pi,
            "q_max": math.pi,
            "v_max": 2.0,
            "a_max": 5.0,
        }
        for axis in axes
    ]
    return {"joints": joints, "gravity": list(DEFAULT_GRAVITY)}
