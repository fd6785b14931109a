"""Fixture builders shared by several test modules."""
import numpy as np

from artinv.corpus import INPUT_COLUMNS
from artinv.records import AGE_BANDS, PERIODS, VOWELS

# speakers per age band (rows) and period x gender (columns F, M per period)
TABLE1 = {
    "20-35": (18, 41, 18, 18, 30, 29, 31, 31),
    "36-50": (21, 72, 23, 42, 33, 45, 30, 53),
    "51-65": (18, 51, 27, 37, 29, 48, 29, 49),
    ">65": (19, 15, 18, 25, 29, 34, 31, 31),
}
BAND_AGES = {"20-35": (20, 35), "36-50": (36, 50), "51-65": (51, 65), ">65": (66, 85)}


def table1_counts():
    out = {}
    for band, row in TABLE1.items():
        for j, n in enumerate(row):
            out[("FM"[j % 2], band, PERIODS[j // 2])] = n
    return out


def table1_rows(rows_per_speaker=2, seed=0):
    """One row per speaker frame, demographics distributed as in TABLE1."""
    rng = np.random.default_rng(seed)
    lines = []
    k = 0
    for (gender, band, period), n in sorted(table1_counts().items()):
        lo, hi = BAND_AGES[band]
        for _ in range(n):
            sid = f"spk{k:04d}"
            k += 1
            age = int(rng.integers(lo, hi + 1))
            for r in range(rows_per_speaker):
                f1 = rng.uniform(300, 800)
                f = [f1, f1 + rng.uniform(400, 1500), 0.0, 0.0]
                f[2] = f[1] + rng.uniform(300, 900)
                f[3] = f[2] + rng.uniform(300, 900)
                vowel = VOWELS[int(rng.integers(len(VOWELS)))]
                lines.append([sid, gender, str(age), period, vowel, *(repr(float(v)) for v in f),
                              repr(float(rng.uniform(40, 200))), f"fixture:{k}:{r}"])
    return lines


def to_csv(lines, header=INPUT_COLUMNS):
    return ",".join(header) + "\n" + "".join(",".join(l) + "\n" for l in lines)


assert set(TABLE1) == set(AGE_BANDS)
assert sum(sum(r) for r in TABLE1.values()) == 1025
