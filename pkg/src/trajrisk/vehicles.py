"""Vehicle size classification and per-class dynamics parameters.

Collision objects are sized by on-board sensors, so dynamics parameters
(mass, yaw inertia, axle split, cornering stiffness) are looked up from a
class table keyed on the measured dimensions.  Without a height estimate six
classes are distinguished; a height estimate adds two tall classes with
different length/width-to-weight ratios.  All numbers live in
``data/vehicle_classes.json`` and are engineering estimates.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources


@dataclass(frozen=True)
class VehicleParameters:
    """Dynamics parameters of one vehicle class.

    Units: mass kg, yaw_inertia kg*m^2, lengths m, cornering stiffness N/rad
    (per axle), steering limits rad and rad/s (at the front wheels).
    """

    vehicle_class: str
    mass: float
    yaw_inertia: float
    cog_to_front: float
    cog_to_rear: float
    cornering_stiffness_front: float
    cornering_stiffness_rear: float
    max_steering_angle: float
    max_steering_rate: float

    @property
    def wheelbase(self) -> float:
        return self.cog_to_front + self.cog_to_rear


def _params_from_row(row: dict, steering: dict) -> VehicleParameters:
    return VehicleParameters(
        vehicle_class=row["name"],
        mass=row["mass_kg"],
        yaw_inertia=row["yaw_inertia_kgm2"],
        cog_to_front=row["cog_to_front_m"],
        cog_to_rear=row["cog_to_rear_m"],
        cornering_stiffness_front=row["cornering_stiffness_front_nprad"],
        cornering_stiffness_rear=row["cornering_stiffness_rear_nprad"],
        max_steering_angle=steering["max_steering_angle_rad"],
        max_steering_rate=steering["max_steering_rate_radps"],
    )


@lru_cache(maxsize=1)
def load_class_table() -> dict:
    """Load and sanity-check the bundled class table."""
    text = resources.files("trajrisk.data").joinpath("vehicle_classes.json").read_text()
    table = json.loads(text)
    steering = table["steering"]
    for row in table["base_classes"] + table["tall_classes"]:
        params = _params_from_row(row, steering)
        if params.wheelbase >= row["nominal"]["length_m"]:
            raise ValueError(f"class table row '{row['name']}': wheelbase exceeds length")
    return table


def class_names(with_height: bool) -> list[str]:
    table = load_class_table()
    names = [row["name"] for row in table["base_classes"]]
    if with_height:
        names += [row["name"] for row in table["tall_classes"]]
    return names


def classify_vehicle(length: float, width: float, height: float | None = None) -> VehicleParameters:
    """Map measured dimensions to the parameter record of the nearest class.

    Classification is total and deterministic.  Base classes are length bins;
    a length exactly on a bin boundary resolves to the smaller class.  When a
    height estimate at or above the tall threshold is given, the vehicle is
    one of the two tall classes, split by length with the same tie-break.
    """
    if length <= 0 or width <= 0:
        raise ValueError("length and width must be positive")
    table = load_class_table()
    steering = table["steering"]

    if height is not None and height >= table["height_threshold_m"]:
        off_roader, cargo = table["tall_classes"]
        row = off_roader if length <= table["tall_length_split_m"] else cargo
        return _params_from_row(row, steering)

    for row in table["base_classes"]:
        if row["max_length_m"] is None or length <= row["max_length_m"]:
            return _params_from_row(row, steering)
    raise AssertionError("class table has no open-ended final bin")


def nominal_dimensions(vehicle_class: str) -> tuple[float, float, float]:
    """Nominal (length, width, height) of a class, for tests and tooling."""
    table = load_class_table()
    for row in table["base_classes"] + table["tall_classes"]:
        if row["name"] == vehicle_class:
            nom = row["nominal"]
            return nom["length_m"], nom["width_m"], nom["height_m"]
    raise KeyError(vehicle_class)
