"""Writes the bundled description of one PRECIS floor (zones Z0-Z8).

Zone roles and orientations follow the published floor layout: Z1-Z4 and Z7 are
laboratories, Z5-Z6 offices, Z8 a meeting room and Z0 the hallways. Dimensions,
constructions and HVAC sizing are representative values, not survey data.
"""

import argparse
import json

HEIGHT = 3.0
AIR_J_PER_M3K = 1206.0
FURNITURE_FACTOR = 5.0

ZONES = [
    # id, usage, orientation, floor area, exterior wall, window, schedule
    ("Z0", "hallway", "core", 250.0, 30.0, 0.0, "hallway"),
    ("Z1", "laboratory", "N", 60.0, 24.0, 8.0, "lab"),
    ("Z2", "laboratory", "E", 60.0, 24.0, 8.0, "lab"),
    ("Z3", "laboratory", "S", 60.0, 24.0, 8.0, "lab"),
    ("Z4", "laboratory", "W", 60.0, 24.0, 8.0, "lab"),
    ("Z5", "office", "N", 35.0, 14.0, 5.0, "office"),
    ("Z6", "office", "E", 35.0, 14.0, 5.0, "office"),
    ("Z7", "laboratory", "S", 60.0, 24.0, 8.0, "lab"),
    ("Z8", "meeting", "W", 45.0, 18.0, 6.0, "meeting"),
]
NEIGHBOURS = [("Z1", "Z5", 18.0), ("Z2", "Z6", 18.0), ("Z3", "Z7", 18.0), ("Z4", "Z8", 18.0)]
LABS_WITH_AHU = ["Z1", "Z2", "Z3", "Z4", "Z7"]

FILM_IN = {"thermal_resistance": 0.13, "areal_heat_capacity": 0.0}
FILM_OUT = {"thermal_resistance": 0.04, "areal_heat_capacity": 0.0}
EXTERIOR_WALL = [
    FILM_IN,
    {"thermal_resistance": 0.1, "areal_heat_capacity": 432000.0},   # 0.2 m concrete
    {"thermal_resistance": 3.0, "areal_heat_capacity": 0.0},        # mineral wool
    {"thermal_resistance": 0.125, "areal_heat_capacity": 181440.0}, # 0.12 m brick
    FILM_OUT,
]
PARTITION = [FILM_IN, {"thermal_resistance": 0.15, "areal_heat_capacity": 181440.0}, FILM_IN]
WINDOW = [{"thermal_resistance": 0.714, "areal_heat_capacity": 0.0}]
SLAB = [
    {"thermal_resistance": 0.17, "areal_heat_capacity": 0.0},
    {"thermal_resistance": 0.125, "areal_heat_capacity": 540000.0},  # 0.25 m concrete
    {"thermal_resistance": 2.0, "areal_heat_capacity": 0.0},         # insulation
]


def build() -> dict:
    zones, elements, actuators, disturbances = [], [], [], []
    for zid, usage, orient, area, wall, window, sched in ZONES:
        volume = area * HEIGHT
        zones.append({
            "id": zid,
            "floor_area": area,
            "volume": volume,
            "air_heat_capacity": round(volume * AIR_J_PER_M3K * FURNITURE_FACTOR),
            "orientation": orient,
            "comfort_schedule_id": sched,
            "usage": usage,
        })
        elements.append({"id": f"{zid}_ext_wall", "kind": "wall", "area": wall,
                         "boundary": [zid, "AMBIENT"], "layers": EXTERIOR_WALL})
        if window > 0:
            elements.append({"id": f"{zid}_window", "kind": "window", "area": window,
                             "boundary": [zid, "AMBIENT"], "layers": WINDOW, "solar_transmittance": 0.5})
        if zid != "Z0":
            elements.append({"id": f"{zid}_Z0_partition", "kind": "wall", "area": 3.0 * area ** 0.5 * 1.3,
                             "boundary": [zid, "Z0"], "layers": PARTITION})
        elements.append({"id": f"{zid}_slab", "kind": "floor_slab", "area": area,
                         "boundary": [zid, "GROUND"], "layers": SLAB})
    for a, b, area in NEIGHBOURS:
        elements.append({"id": f"{a}_{b}_partition", "kind": "wall", "area": area,
                         "boundary": [a, b], "layers": PARTITION})
    for e in elements:
        e["area"] = round(e["area"], 2)

    for zid, _, _, area, *_ in ZONES:
        scale = area / 60.0
        actuators.append({"id": f"FC_H_{zid}", "kind": "fancoil_heat", "zone_id": zid,
                          "gain_coefficient": round(60.0 * scale, 1), "reference_signal": "T_hot_water",
                          "input_bounds": [0.0, 1.0], "electrical_conversion": 0.3})
    for zid, _, _, area, *_ in ZONES:
        scale = area / 60.0
        actuators.append({"id": f"FC_C_{zid}", "kind": "fancoil_cool", "zone_id": zid,
                          "gain_coefficient": round(100.0 * scale, 1), "reference_signal": "T_chilled_water",
                          "input_bounds": [0.0, 1.0], "electrical_conversion": 0.3})
    for i, zid in enumerate(LABS_WITH_AHU, start=1):
        actuators.append({"id": f"CTA{i}", "kind": "ahu_vent", "zone_id": zid,
                          "gain_coefficient": 240.0, "reference_signal": "T_supply_air",
                          "input_bounds": [0.0, 1.0], "electrical_conversion": 1.0})

    disturbances += [
        {"name": "T_ambient", "kind": "ambient_temperature"},
        {"name": "T_ground", "kind": "ground_temperature", "nominal": 10.0},
        {"name": "I_N", "kind": "solar_irradiance", "orientation": "N"},
        {"name": "I_S", "kind": "solar_irradiance", "orientation": "S"},
        {"name": "I_E", "kind": "solar_irradiance", "orientation": "E"},
        {"name": "I_W", "kind": "solar_irradiance", "orientation": "W"},
        {"name": "T_hot_water", "kind": "supply_temperature", "supply": "hot_water", "nominal": 70.0},
        {"name": "T_chilled_water", "kind": "supply_temperature", "supply": "chilled_water", "nominal": 7.0},
        {"name": "T_supply_air", "kind": "supply_temperature", "supply": "supply_air", "nominal": 18.0},
    ]
    for zid, *_ in ZONES:
        disturbances.append({"name": f"Q_{zid}", "kind": "internal_gain", "zone": zid})

    weekdays = {"days": ["mon", "tue", "wed", "thu", "fri"]}
    schedules = {
        "lab": {"occupied": [21.0, 24.0], "unoccupied": [15.0, 25.0],
                "occupancy_windows": [{**weekdays, "start": "08:00", "end": "18:00"}]},
        "office": {"occupied": [21.0, 24.0], "unoccupied": [15.0, 25.0],
                   "occupancy_windows": [{**weekdays, "start": "08:00", "end": "18:00"}]},
        "meeting": {"occupied": [21.0, 24.0], "unoccupied": [15.0, 25.0],
                    "occupancy_windows": [{**weekdays, "start": "09:00", "end": "17:00"}]},
        "hallway": {"occupied": [19.0, 25.0], "unoccupied": [15.0, 25.0],
                    "occupancy_windows": [{**weekdays, "start": "07:30", "end": "19:00"}]},
    }
    return {"name": "PRECIS floor", "zones": zones, "elements": elements, "actuators": actuators,
            "comfort_schedules": schedules, "disturbances": disturbances}


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("output")
    args = parser.parse_args()
    with open(args.output, "w") as f:
        json.dump(build(), f, indent=2)
        f.write("\n")


if __name__ == "__main__":
    main()
