#!/usr/bin/env python3
"""Generate data/office_synthetic.map.json.

Synthetic single-floor office: 50 m x 25 m footprint, 3 m ceiling.
Ten rooms of uneven width in two rows (x in [0,40]) separated by a 2 m
corridor (y in [11,13]), plus an open-plan area (x in [40,50]) with
cubicle panels. Partition and door positions are deliberately
irregular so that no interior wall is a mirror plane of the rest of
the map. Room furniture (1.9 m privacy panels, 2.05 m cabinets) breaks
up long interior sightlines. Exactly 70 surfaces. Deterministic
output.
"""

import json
import os

SURFACES = []


def rect(sid, material, a, b, c, d, loss=None):
    s = {"id": sid, "vertices": [list(a), list(b), list(c), list(d)], "material": material}
    if loss is not None:
        s["transmission_loss_db"] = loss
    SURFACES.append(s)


def wall_x(sid, x, y0, y1, z0, z1, material="drywall", loss=None):
    rect(sid, material, (x, y0, z0), (x, y1, z0), (x, y1, z1), (x, y0, z1), loss)


def wall_y(sid, y, x0, x1, z0, z1, material="drywall", loss=None):
    rect(sid, material, (x0, y, z0), (x1, y, z0), (x1, y, z1), (x0, y, z1), loss)


H = 3.0          # ceiling height
DOOR_W = 1.2     # door gap width
DOOR_H = 2.1     # lintel underside

# Door centers differ between the two corridor walls.
DOORS_S = [4.6, 11.3, 20.7, 27.4, 36.8]
DOORS_N = [3.4, 12.8, 19.5, 28.9, 35.2]

# Interior partitions; the x=40 pair closes off the open-plan area.
PART_S = [8.0, 16.4, 24.1, 32.7, 40.0]
PART_N = [8.6, 15.7, 24.8, 31.9, 40.0]

# Outer shell (4)
wall_x("outer_w", 0.0, 0.0, 25.0, 0.0, H)
wall_x("outer_e", 50.0, 0.0, 25.0, 0.0, H)
wall_y("outer_s", 0.0, 0.0, 50.0, 0.0, H)
wall_y("outer_n", 25.0, 0.0, 50.0, 0.0, H)

# Floor and ceiling (2)
rect("floor", "concrete", (0, 0, 0), (50, 0, 0), (50, 25, 0), (0, 25, 0), 13.0)
rect("ceiling", "concrete", (0, 0, H), (50, 0, H), (50, 25, H), (0, 25, H), 13.0)

# Corridor walls at y=11 and y=13 with one door per room (12 segments)
for side, y, doors in (("s", 11.0, DOORS_S), ("n", 13.0, DOORS_N)):
    xs = [0.0]
    for c in doors:
        xs += [c - DOOR_W / 2, c + DOOR_W / 2]
    xs.append(40.0)
    for i in range(0, len(xs), 2):
        wall_y(f"corridor_{side}_{i // 2}", y, xs[i], xs[i + 1], 0.0, H)

# Door lintels (10)
for side, y, doors in (("s", 11.0, DOORS_S), ("n", 13.0, DOORS_N)):
    for i, c in enumerate(doors):
        wall_y(f"lintel_{side}_{i}", y, c - DOOR_W / 2, c + DOOR_W / 2, DOOR_H, H)

# Room partitions (10)
for i, x in enumerate(PART_S):
    wall_x(f"partition_s_{i}", x, 0.0, 11.0, 0.0, H)
for i, x in enumerate(PART_N):
    wall_x(f"partition_n_{i}", x, 13.0, 25.0, 0.0, H)

# One freestanding 1.9 m privacy panel per room (10), irregular placement
PANEL_H = 1.9
wall_y("panel_s_0", 3.8, 2.1, 5.1, 0.0, PANEL_H, "panel", 4.0)
wall_x("panel_s_1", 11.4, 2.9, 5.9, 0.0, PANEL_H, "panel", 4.0)
wall_y("panel_s_2", 4.3, 18.2, 21.2, 0.0, PANEL_H, "panel", 4.0)
wall_x("panel_s_3", 27.6, 3.4, 6.4, 0.0, PANEL_H, "panel", 4.0)
wall_y("panel_s_4", 3.6, 34.0, 37.0, 0.0, PANEL_H, "panel", 4.0)
wall_x("panel_n_0", 4.9, 18.3, 21.3, 0.0, PANEL_H, "panel", 4.0)
wall_y("panel_n_1", 21.2, 10.4, 13.4, 0.0, PANEL_H, "panel", 4.0)
wall_x("panel_n_2", 19.8, 19.1, 22.1, 0.0, PANEL_H, "panel", 4.0)
wall_y("panel_n_3", 20.6, 26.3, 29.3, 0.0, PANEL_H, "panel", 4.0)
wall_x("panel_n_4", 35.8, 17.9, 20.9, 0.0, PANEL_H, "panel", 4.0)

# One tall storage cabinet per room (10)
CAB_H = 2.05
wall_x("cabinet_s_0", 5.6, 6.8, 8.2, 0.0, CAB_H, "cabinet", 5.0)
wall_y("cabinet_s_1", 7.4, 9.1, 10.5, 0.0, CAB_H, "cabinet", 5.0)
wall_x("cabinet_s_2", 19.3, 1.2, 2.6, 0.0, CAB_H, "cabinet", 5.0)
wall_y("cabinet_s_3", 6.1, 29.8, 31.2, 0.0, CAB_H, "cabinet", 5.0)
wall_x("cabinet_s_4", 36.9, 7.3, 8.7, 0.0, CAB_H, "cabinet", 5.0)
wall_y("cabinet_n_0", 16.9, 5.3, 6.7, 0.0, CAB_H, "cabinet", 5.0)
wall_x("cabinet_n_1", 12.2, 21.7, 23.1, 0.0, CAB_H, "cabinet", 5.0)
wall_y("cabinet_n_2", 23.3, 17.6, 19.0, 0.0, CAB_H, "cabinet", 5.0)
wall_x("cabinet_n_3", 28.4, 15.2, 16.6, 0.0, CAB_H, "cabinet", 5.0)
wall_y("cabinet_n_4", 18.8, 36.2, 37.6, 0.0, CAB_H, "cabinet", 5.0)

# Open-plan cubicle columns (12 panels, 1.5 m)
CUBE_H = 1.5
for col, x, centers in (
    ("a", 42.7, (3.2, 6.9, 10.7, 14.2, 17.8, 21.5)),
    ("b", 47.3, (4.1, 7.6, 11.3, 15.0, 18.4, 22.1)),
):
    for j, yc in enumerate(centers):
        wall_x(f"cubicle_{col}_{j}", x, yc - 1.25, yc + 1.25, 0.0, CUBE_H, "panel", 4.0)

doc = {"name": "office_synthetic", "units": "meters", "surfaces": SURFACES}

out = os.path.join(os.path.dirname(__file__), "..", "data", "office_synthetic.map.json")
os.makedirs(os.path.dirname(out), exist_ok=True)
with open(out, "w") as f:
    json.dump(doc, f, indent=1)
    f.write("\n")
print(f"wrote {os.path.normpath(out)}: {len(SURFACES)} surfaces")
