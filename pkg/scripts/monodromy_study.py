"""Rotate a cluster of branch points and compare periods before and after."""
import argparse
import math
from dataclasses import dataclass

import numpy as np

from tricover.degeneration import scale_subset_for_edge, transported_periods
from tricover.io import parse_config
from tricover.thomae import EXAMPLE7
from tricover.trees import BranchConfig


@dataclass
class Config:
    shift: complex = -0.5
    edge: tuple[str, str] = ("p", "q")
    max_turns: int = 3


def main(cfg: Config) -> list[tuple[int, float]]:
    config, tree, _ = parse_config(EXAMPLE7)
    config = BranchConfig(tuple(z + cfg.shift for z in config.points), config.indices)
    subset = scale_subset_for_edge(tree, cfg.edge)
    base = np.concatenate(transported_periods(config, tree, subset, 0.0))
    scale = float(np.abs(base).max())
    rows = []
    for turns in range(1, cfg.max_turns + 1):
        after = np.concatenate(transported_periods(config, tree, subset, 2 * math.pi * turns))
        drift = float(np.abs(after - base).max()) / scale
        rows.append((turns, drift))
        print(f"turns={turns}  relative period change {drift:.2e}")
    return rows


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--turns", type=int, default=Config.max_turns)
    args = ap.parse_args()
    main(Config(max_turns=args.turns))
