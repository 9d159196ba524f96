import csv
from pathlib import Path
from typing import Dict, List


def read_csv(path: Path) -> List[Dict[str, str]]:
    """Rows of a result table, keyed by column name."""
    with path.open(newline="") as f:
        return list(csv.DictReader(f))


def relative_error(value: complex, reference: complex) -> float:
    return abs(value - reference) / max(abs(reference), 1e-300)


# amplifier click probabilities in percent, rows k1 = 0..4, columns k2 = 0..4
AMPLIFIER_TABLE = [
    [16.80, 8.83, 2.47, 0.39, 0.03],
    [8.46, 12.38, 6.85, 1.88, 0.22],
    [3.17, 8.24, 7.90, 3.54, 0.65],
    [0.81, 3.32, 4.99, 3.48, 0.99],
    [0.11, 0.67, 1.52, 1.60, 0.70],
]
