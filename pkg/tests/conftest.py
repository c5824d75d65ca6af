import numpy as np
import pytest

from bebp import data as D

TAGS = {
    "NORMAL": ["normal"],
    "DOS": ["smurf", "neptune"],
    "PROB": ["satan", "ipsweep"],
    "R2L": ["guess_passwd"],
    "U2R": ["buffer_overflow"],
}


def kdd_rows(counts, seed=0, difficulty=True):
    """Synthetic 41-feature KDD-format lines (not real traffic)."""
    rng = np.random.default_rng(seed)
    lines = []
    for g_idx, (group, n) in enumerate(counts.items()):
        for _ in range(n):
            tag = TAGS[group][rng.integers(len(TAGS[group]))]
            num = rng.normal(loc=g_idx, scale=0.7, size=38).round(3)
            proto = ["tcp", "udp", "icmp"][(g_idx + rng.integers(2)) % 3]
            service = ["http", "ftp", "smtp", "private"][rng.integers(4)]
            flag = ["SF", "S0", "REJ"][(g_idx + rng.integers(2)) % 3]
            fields = [str(num[0]), proto, service, flag] + [str(v) for v in num[1:]]
            fields.append(tag + ("" if difficulty else "."))
            if difficulty:
                fields.append(str(rng.integers(1, 22)))
            lines.append(",".join(fields))
    order = rng.permutation(len(lines))
    return [lines[i] for i in order]


@pytest.fixture
def kdd_file(tmp_path):
    def make(counts, name="train.txt", seed=0, difficulty=True):
        path = tmp_path / name
        path.write_text("\n".join(kdd_rows(counts, seed, difficulty)) + "\n")
        return path
    return make


@pytest.fixture
def moons():
    train = D.make_moons(100, 0.2, seed=3)
    params = D.fit_normalize(train)
    return D.apply_normalize(params, train)
