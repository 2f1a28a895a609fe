"""Generate the bundled synthetic fixtures. Deterministic; rerun to refresh."""
import random
from pathlib import Path

ROOT = Path(__file__).parent

# New in-use ASNs per year for 1994..2012, shaped like slow-then-fast regional growth.
PROFILES = {
    "IN": (3, 1.22, 0.25),
    "CN": (5, 1.24, 0.2),
    "JP": (20, 1.09, 0.3),
    "KR": (18, 1.08, 0.3),
    "TW": (6, 1.10, 0.3),
    "AU": (30, 1.10, 0.25),
    "SG": (4, 1.12, 0.3),
}
YEARS = range(1994, 2013)


def synthetic():
    rng = random.Random(20130101)
    out = ROOT / "synthetic"
    (out / "snapshots").mkdir(parents=True, exist_ok=True)
    lines = [
        "2.3|apnic|20130101|0|19940101|20121231|+1000",
        "apnic|*|asn|*|0|summary",
        "# synthetic delegated statistics for tests",
    ]
    next_asn = 1000
    in_use = {cc: [] for cc in PROFILES}
    for year in YEARS:
        for cc, (base, growth, noise) in PROFILES.items():
            k = year - YEARS.start
            mean = base * growth**k
            n = max(0, round(mean * (1 + noise * rng.uniform(-1, 1))))
            remaining = n
            while remaining > 0:
                block = min(remaining, rng.choice([1, 1, 1, 2, 4]))
                month, day = rng.randint(1, 12), rng.randint(1, 28)
                status = rng.choice(["allocated", "assigned"])
                lines.append(f"apnic|{cc}|asn|{next_asn}|{block}|{year}{month:02d}{day:02d}|{status}")
                in_use[cc].extend(range(next_asn, next_asn + block))
                next_asn += block
                remaining -= block
    lines.append(f"apnic|IN|asn|{next_asn}|3|20100315|reserved")
    lines.append(f"apnic||asn|{next_asn + 3}|10||available")
    lines.append("apnic|IN|ipv4|1.2.3.0|256|20050101|allocated")
    (out / "delegated-apnic.txt").write_text("\n".join(lines) + "\n")

    every = sorted(a for v in in_use.values() for a in v)
    base_visible = set(rng.sample(every, int(0.8 * len(every))))
    india = in_use["IN"]
    for day in range(1, 6):
        visible = set(base_visible)
        if day == 3:
            # One-day outage hiding 40% of the Indian ASNs that were visible.
            seen = sorted(a for a in india if a in visible)
            visible -= set(seen[: int(0.4 * len(seen))])
        visible |= {64512 + day}
        body = "\n".join(str(a) for a in sorted(visible))
        (out / "snapshots" / f"asns-201301{day:02d}.txt").write_text(f"# day {day}\n{body}\n")

    (out / "analysis.conf").write_text(
        "\n".join(
            [
                "delegated = delegated-apnic.txt",
                "snapshots = snapshots",
                "countries = IN, CN, JP",
                "region = apnic",
                "group_within = CN",
                "group_across = JP, KR, TW",
                "models = 1,1,1; 1,1,2; 2,1,3",
                "train_len = 14",
                "horizon = 5",
                "confidence = 0.95",
                "end_year = 2012",
                "",
            ]
        )
    )


def reachability():
    """Counts matching the assigned/advertised columns for India, China and the region."""
    out = ROOT / "reachability"
    out.mkdir(exist_ok=True)
    counts = {"IN": (607, 495), "CN": (551, 220)}
    region_assigned, region_advertised = 8420, 5285
    other_assigned = region_assigned - sum(a for a, _ in counts.values())
    other_advertised = region_advertised - sum(v for _, v in counts.values())
    counts["AU"] = (other_assigned, other_advertised)
    lines = ["2.3|apnic|20130101|0|19940101|20121231|+1000"]
    visible = []
    asn = 1
    for cc, (assigned, advertised) in counts.items():
        lines.append(f"apnic|{cc}|asn|{asn}|{assigned}|20100101|allocated")
        visible.extend(range(asn, asn + advertised))
        asn += assigned
    lines.append(f"apnic|IN|asn|{asn}|7|20110101|reserved")
    (out / "delegated-apnic.txt").write_text("\n".join(lines) + "\n")
    (out / "snapshots").mkdir(exist_ok=True)
    # A routing table also carries ASNs outside the registry subset.
    body = "\n".join(str(a) for a in visible + [4200000000, 4200000001])
    (out / "snapshots" / "asns-20130101.txt").write_text(body + "\n")


if __name__ == "__main__":
    synthetic()
    reachability()
