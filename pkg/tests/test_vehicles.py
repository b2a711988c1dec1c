"""Vehicle classification against the bundled class table."""

import pytest

from trajrisk.vehicles import (
    VehicleParameters,
    class_names,
    classify_vehicle,
    load_class_table,
    nominal_dimensions,
)


def test_smallest_class_dimensions():
    # The reference dimensions of the smallest class: 3.13 m x 1.46 m.
    params = classify_vehicle(3.13, 1.46)
    assert params.vehicle_class == "quadricycle"


def test_very_large_with_height_is_cargo():
    assert classify_vehicle(7.0, 2.4, 3.0).vehicle_class == "cargo"


def test_six_classes_without_height_eight_with():
    assert len(class_names(with_height=False)) == 6
    assert len(class_names(with_height=True)) == 8
    # Without a height estimate the tall classes are unreachable.
    assert classify_vehicle(7.0, 2.4).vehicle_class == "multi_purpose"


def test_height_below_threshold_stays_in_base_classes():
    table = load_class_table()
    below = table["height_threshold_m"] - 0.01
    assert classify_vehicle(4.7, 1.9, below).vehicle_class in class_names(False)
    at = table["height_threshold_m"]
    assert classify_vehicle(4.7, 1.9, at).vehicle_class == "off_roader"


def test_boundary_lengths_resolve_to_lower_class():
    # Enumerate every bin boundary from the data file: a length exactly on a
    # boundary belongs to the smaller class.
    table = load_class_table()
    for row in table["base_classes"]:
        if row["max_length_m"] is None:
            continue
        boundary = row["max_length_m"]
        assert classify_vehicle(boundary, 1.8).vehicle_class == row["name"]
        assert classify_vehicle(boundary + 1e-9, 1.8).vehicle_class != row["name"]
    split = table["tall_length_split_m"]
    assert classify_vehicle(split, 2.0, 2.2).vehicle_class == "off_roader"
    assert classify_vehicle(split + 1e-9, 2.0, 2.2).vehicle_class == "cargo"


def test_classification_total_and_deterministic(rng):
    for _ in range(300):
        length = rng.uniform(0.5, 12.0)
        width = rng.uniform(0.3, 3.0)
        height = rng.uniform(0.5, 4.0) if rng.random() < 0.5 else None
        first = classify_vehicle(length, width, height)
        second = classify_vehicle(length, width, height)
        assert isinstance(first, VehicleParameters)
        assert first == second


def test_nominal_class_dimensions_cover_wheelbase():
    for name in class_names(with_height=True):
        length, width, height = nominal_dimensions(name)
        params = classify_vehicle(length, width, height)
        assert params.wheelbase < length
        assert params.mass > 0 and params.yaw_inertia > 0
        assert params.cornering_stiffness_front > 0
        assert params.cornering_stiffness_rear > 0


def test_table_rows_are_understeering():
    # Stability of the linear lateral model: rear axle moment dominates.
    for name in class_names(with_height=True):
        params = classify_vehicle(*nominal_dimensions(name))
        front = params.cornering_stiffness_front * params.cog_to_front
        rear = params.cornering_stiffness_rear * params.cog_to_rear
        assert rear > front


def test_invalid_dimensions_rejected():
    with pytest.raises(ValueError):
        classify_vehicle(0.0, 1.5)
    with pytest.raises(ValueError):
        classify_vehicle(4.0, -1.0)
