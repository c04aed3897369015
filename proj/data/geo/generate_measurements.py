#!/usr/bin/env python3
# Copyright 2026 The nmp-sdn Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Writes the synthetic latency fixture (CSV and JSON) for the relay triplets.

The records are deterministic: RTTs are twice the fibre propagation delay of
the great-circle distance, inflated by a per-leg path stretch and a small
hourly queueing term. Rerunning the script reproduces the shipped files.
"""

import csv
import json
import math
import random
from pathlib import Path

HERE = Path(__file__).resolve().parent
BASE_TS = 1546300800
HOURS = 24
FIBRE_KM_PER_MS = 299792.458 * 2.0 / 3.0 / 1000.0

TRIPLETS = [
    ("Vienna", "Kosice", "Issy-les-Moulineaux"),
    ("Vienna", "Poplar", "Issy-les-Moulineaux"),
    ("Vienna", "Ljubljana", "Issy-les-Moulineaux"),
    ("Nitra", "Leudelange", "Rotterdam"),
    ("Nitra", "Ljubljana", "Rotterdam"),
    ("Nitra", "Blackheath", "Rotterdam"),
    ("Riga", "Tallinn", "Blackheath"),
    ("Riga", "Tampere", "Blackheath"),
    ("Riga", "Rotterdam", "Blackheath"),
    ("Sandyford", "Leudelange", "Gamlingay"),
    ("Sandyford", "Nijmegen", "Gamlingay"),
    ("Sandyford", "Middelkerke", "Gamlingay"),
    ("Sandyford", "Asnieres-sur-Seine", "Gamlingay"),
    ("Tampere", "Riga", "Rotterdam"),
    ("Tampere", "Tallinn", "Rotterdam"),
    ("Tampere", "Blackheath", "Rotterdam"),
    ("Arhus", "Rotterdam", "Blackheath"),
    ("Arhus", "Alkmaar", "Blackheath"),
    ("Arhus", "Leudelange", "Blackheath"),
    ("Blackheath", "Nitra", "Ljubljana"),
    ("Blackheath", "Alkmaar", "Ljubljana"),
    ("Blackheath", "Rotterdam", "Ljubljana"),
]


def load_cities():
    with open(HERE / "cities.csv", newline="") as f:
        return {r["name"]: (float(r["latitude"]), float(r["longitude"])) for r in csv.DictReader(f)}


def haversine(a, b):
    la1, lo1 = map(math.radians, a)
    la2, lo2 = map(math.radians, b)
    h = math.sin((la2 - la1) / 2) ** 2 + math.cos(la1) * math.cos(la2) * math.sin((lo2 - lo1) / 2) ** 2
    return 2 * 6371.0 * math.asin(math.sqrt(h))


def main():
    cities = load_cities()
    legs = []
    for s, r, d in TRIPLETS:
        for leg in ((s, r), (r, d)):
            if leg not in legs and leg[::-1] not in legs:
                legs.append(leg)
    rng = random.Random(2019)
    records = []
    for a, b in legs:
        stretch = rng.uniform(1.3, 2.0)
        offset = rng.randrange(0, 400)
        base_rtt = 2 * haversine(cities[a], cities[b]) / FIBRE_KM_PER_MS * stretch
        flip = rng.random() < 0.5
        for h in range(HOURS):
            rtt = base_rtt + rng.expovariate(1.0 / 1.5)
            src, dst = (b, a) if flip and h % 2 else (a, b)
            records.append({
                "src": src,
                "dst": dst,
                "rtt": round(rtt, 3),
                "timestamp": BASE_TS + 3600 * h + offset,
                "msm_id": 1000 + legs.index((a, b)),
                "prb_id": 6000 + h,
            })
    with open(HERE / "measurements.csv", "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["src", "dst", "rtt", "timestamp"])
        for r in records:
            w.writerow([r["src"], r["dst"], f"{r['rtt']:.3f}", r["timestamp"]])
    with open(HERE / "measurements.json", "w") as f:
        json.dump(records, f, indent=1)
        f.write("\n")


if __name__ == "__main__":
    main()
