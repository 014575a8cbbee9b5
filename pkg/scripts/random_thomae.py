"""Thomae identity on random branch configurations, random trees and random equidistributed classes."""
import argparse
import json
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from tricover.cycles import choose_base_point
from tricover.thomae import verify_thomae
from tricover.trees import BranchConfig, TreeError, equidistributed_vectors, random_tree

DEFAULT_PATTERNS = ((2, 2, 1, 1), (1, 1, 1, 1, 2), (2, 2, 2, 2, 1), (1,) * 6, (1, 1, 1, 2, 2, 2))


@dataclass
class Config:
    patterns: tuple[tuple[int, ...], ...] = DEFAULT_PATTERNS
    per_pattern: int = 5
    seed: int = 0
    precision: str = "double"
    out: str | None = None


@dataclass
class Row:
    indices: tuple[int, ...]
    genus: int
    lam: tuple[int, ...]
    phase_test: float
    modulus_dev: float
    seconds: float
    ok: bool = field(default=False)


def instance(rng, pattern):
    m = len(pattern)
    while True:
        config = BranchConfig(tuple(rng.normal(size=m) + 1j * rng.normal(size=m)),
                              tuple(int(a) for a in rng.permutation(pattern)))
        try:
            tree = random_tree(list(choose_base_point(config).order[::-1]), config.indices, rng)
        except TreeError:
            continue
        vecs = equidistributed_vectors(config.indices)
        if vecs:
            return config, tree, vecs[int(rng.integers(len(vecs)))]


def main(cfg: Config) -> list[Row]:
    rng = np.random.default_rng(cfg.seed)
    rows = []
    for pattern in cfg.patterns:
        for _ in range(cfg.per_pattern):
            config, tree, lam = instance(rng, pattern)
            start = time.perf_counter()
            rep = verify_thomae(config, tree, lam, precision=cfg.precision)
            row = Row(config.indices, config.genus, tuple(lam), rep.phase_test, rep.modulus_dev,
                      time.perf_counter() - start, rep.ok)
            rows.append(row)
            print(f"a={''.join(map(str, row.indices)):<8} g={row.genus}  lam={''.join(map(str, row.lam)):<8} "
                  f"phase={row.phase_test:.1e}  modulus={row.modulus_dev:.1e}  {row.seconds:.2f}s  "
                  f"{'ok' if row.ok else 'FAIL'}")
    print(f"{sum(r.ok for r in rows)}/{len(rows)} passed")
    if cfg.out:
        with open(cfg.out, "w") as fh:
            json.dump({"config": asdict(cfg), "rows": [asdict(r) for r in rows]}, fh, indent=2)
    return rows


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--per-pattern", type=int, default=Config.per_pattern)
    ap.add_argument("--seed", type=int, default=Config.seed)
    ap.add_argument("--precision", choices=["double", "extended"], default=Config.precision)
    ap.add_argument("--out")
    args = ap.parse_args()
    main(Config(per_pattern=args.per_pattern, seed=args.seed, precision=args.precision, out=args.out))
