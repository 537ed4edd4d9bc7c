"""Emit the packaged CMT benchmark instance files.

Coordinates and demands are the classic Eilon 50/75/100-customer sets.
Sanity checks: customer counts and total demands against the published
values (777 / 1364 / 1458).
"""

from pathlib import Path

CMT1 = {
    "name": "CMT1",
    "capacity": 160,
    "depot": (30, 40),
    "expected_total": 777,
    # (x, y, demand)
    "customers": [
        (37, 52, 7), (49, 49, 30), (52, 64, 16), (20, 26, 9), (40, 30, 21),
        (21, 47, 15), (17, 63, 19), (31, 62, 23), (52, 33, 11), (51, 21, 5),
        (42, 41, 19), (31, 32, 29), (5, 25, 23), (12, 42, 21), (36, 16, 10),
        (52, 41, 15), (27, 23, 3), (17, 33, 41), (13, 13, 9), (57, 58, 28),
        (62, 42, 8), (42, 57, 8), (16, 57, 16), (8, 52, 10), (7, 38, 28),
        (27, 68, 7), (30, 48, 15), (43, 67, 14), (58, 48, 6), (58, 27, 19),
        (37, 69, 11), (38, 46, 12), (46, 10, 23), (61, 33, 26), (62, 63, 17),
        (63, 69, 6), (32, 22, 9), (45, 35, 15), (59, 15, 14), (5, 6, 7),
        (10, 17, 27), (21, 10, 13), (5, 64, 11), (30, 15, 16), (39, 10, 10),
        (32, 39, 5), (25, 32, 25), (25, 55, 17), (48, 28, 18), (56, 37, 10),
    ],
}

CMT2 = {
    "name": "CMT2",
    "capacity": 140,
    "depot": (40, 40),
    "expected_total": 1364,
    "customers": [
        (22, 22, 18), (36, 26, 26), (21, 45, 11), (45, 35, 30), (55, 20, 21),
        (33, 34, 19), (50, 50, 15), (55, 45, 16), (26, 59, 29), (40, 66, 26),
        (55, 65, 37), (35, 51, 16), (62, 35, 12), (62, 57, 31), (62, 24, 8),
        (21, 36, 19), (33, 44, 20), (9, 56, 13), (62, 48, 15), (66, 14, 22),
        (44, 13, 28), (26, 13, 12), (11, 28, 6), (7, 43, 27), (17, 64, 14),
        (41, 46, 18), (55, 34, 17), (35, 16, 29), (52, 26, 13), (43, 26, 22),
        (31, 76, 25), (22, 53, 28), (26, 29, 27), (50, 40, 19), (55, 50, 10),
        (54, 10, 12), (60, 15, 14), (47, 66, 24), (30, 60, 16), (30, 50, 33),
        (12, 17, 15), (15, 14, 11), (16, 19, 18), (21, 48, 17), (50, 30, 21),
        (51, 42, 27), (50, 15, 19), (48, 21, 20), (12, 38, 5), (15, 56, 22),
        (29, 39, 12), (54, 38, 19), (55, 57, 22), (67, 41, 16), (10, 70, 7),
        (6, 25, 26), (65, 27, 14), (40, 60, 21), (70, 64, 24), (64, 4, 13),
        (36, 6, 15), (30, 20, 18), (20, 30, 11), (15, 5, 28), (50, 70, 9),
        (57, 72, 37), (45, 42, 30), (38, 33, 10), (50, 4, 8), (66, 8, 11),
        (59, 5, 3), (35, 60, 1), (27, 24, 6), (40, 20, 10), (40, 37, 20),
    ],
}

CMT3 = {
    "name": "CMT3",
    "capacity": 200,
    "depot": (35, 35),
    "expected_total": 1458,
    "customers": [
        (41, 49, 10), (35, 17, 7), (55, 45, 13), (55, 20, 19), (15, 30, 26),
        (25, 30, 3), (20, 50, 5), (10, 43, 9), (55, 60, 16), (30, 60, 16),
        (20, 65, 12), (50, 35, 19), (30, 25, 23), (15, 10, 20), (30, 5, 8),
        (10, 20, 19), (5, 30, 2), (20, 40, 12), (15, 60, 17), (45, 65, 9),
        (45, 20, 11), (45, 10, 18), (55, 5, 29), (65, 35, 3), (65, 20, 6),
        (45, 30, 17), (35, 40, 16), (41, 37, 16), (64, 42, 9), (40, 60, 21),
        (31, 52, 27), (35, 69, 23), (53, 52, 11), (65, 55, 14), (63, 65, 8),
        (2, 60, 5), (20, 20, 8), (5, 5, 16), (60, 12, 31), (40, 25, 9),
        (42, 7, 5), (24, 12, 5), (23, 3, 7), (11, 14, 18), (6, 38, 16),
        (2, 48, 1), (8, 56, 27), (13, 52, 36), (6, 68, 30), (47, 47, 13),
        (49, 58, 10), (27, 43, 9), (37, 31, 14), (57, 29, 18), (63, 23, 2),
        (53, 12, 6), (32, 12, 7), (36, 26, 18), (21, 24, 28), (17, 34, 3),
        (12, 24, 13), (24, 58, 19), (27, 69, 10), (15, 77, 9), (62, 77, 20),
        (49, 73, 25), (67, 5, 25), (56, 39, 36), (37, 47, 6), (37, 56, 5),
        (57, 68, 15), (47, 16, 25), (44, 17, 9), (46, 13, 8), (49, 11, 18),
        (49, 42, 13), (53, 43, 14), (61, 52, 3), (57, 48, 23), (56, 37, 6),
        (55, 54, 26), (15, 47, 16), (14, 37, 11), (11, 31, 7), (16, 22, 41),
        (4, 18, 35), (28, 18, 26), (26, 52, 9), (26, 35, 15), (31, 67, 3),
        (15, 19, 1), (22, 22, 2), (18, 24, 22), (26, 27, 27), (25, 24, 20),
        (22, 27, 11), (25, 21, 12), (19, 21, 10), (20, 26, 9), (18, 18, 17),
    ],
}


def emit(spec: dict, path: Path) -> None:
    total = sum(d for _, _, d in spec["customers"])
    assert total == spec["expected_total"], (spec["name"], total, spec["expected_total"])
    n = len(spec["customers"]) + 1
    lines = [
        f"NAME : {spec['name']}",
        f"COMMENT : {len(spec['customers'])} customers, capacity {spec['capacity']}",
        "TYPE : CVRP",
        f"DIMENSION : {n}",
        "EDGE_WEIGHT_TYPE : EUC_2D",
        f"CAPACITY : {spec['capacity']}",
        "NODE_COORD_SECTION",
        f" 1 {spec['depot'][0]} {spec['depot'][1]}",
    ]
    for k, (x, y, _) in enumerate(spec["customers"], start=2):
        lines.append(f" {k} {x} {y}")
    lines.append("DEMAND_SECTION")
    lines.append(" 1 0")
    for k, (_, _, d) in enumerate(spec["customers"], start=2):
        lines.append(f" {k} {d}")
    lines.extend(["DEPOT_SECTION", " 1", " -1", "EOF", ""])
    path.write_text("\n".join(lines), encoding="utf-8")
    print(f"{spec['name']}: {len(spec['customers'])} customers, total demand {total} -> {path}")


if __name__ == "__main__":
    data = Path(__file__).resolve().parent.parent / "src" / "qtabu" / "data"
    data.mkdir(parents=True, exist_ok=True)
    emit(CMT1, data / "cmt01.vrp")
    emit(CMT2, data / "cmt02.vrp")
    emit(CMT3, data / "cmt03.vrp")
    bks = data / "bks.json"
    bks.write_text(
        '{\n  "CMT1": 524.61,\n  "CMT2": 835.26,\n  "CMT3": 826.14,\n  "CMT4": 1028.42,\n'
        '  "CMT5": 1291.29,\n  "CMT11": 1042.12,\n  "CMT12": 819.56\n}\n',
        encoding="utf-8",
    )
    print(f"BKS table -> {bks}")
