"""Merge two adjacent white terminals and watch periods, det P_B and the theta factorisation converge."""
import argparse
import json
from dataclasses import asdict, dataclass

from tricover.degeneration import DEFAULT_T, check_detPB_limit, check_period_limits, theta_factorization_check
from tricover.io import load_config, parse_config
from tricover.thomae import EXAMPLE7


@dataclass
class Config:
    config_path: str | None = None  # default: the bundled genus-2 example
    i: int = 2
    j: int | None = None
    lambda_tilde: complex | None = 2.5
    t_sequence: tuple[float, ...] = DEFAULT_T
    out: str | None = None


def main(cfg: Config) -> dict:
    config, tree, lam = load_config(cfg.config_path) if cfg.config_path else parse_config(EXAMPLE7)
    kw = dict(lambda_tilde=cfg.lambda_tilde, t_sequence=cfg.t_sequence, j=cfg.j)
    periods = check_period_limits(config, tree, cfg.i, **kw)
    det = check_detPB_limit(config, tree, cfg.i, **kw)
    fact = theta_factorization_check(config, tree, cfg.i, lam, **kw)

    print(f"{'item':<16}{'extrapolated':>40}{'rel':>10}{'slope':>8}")
    for it in periods.items + [det.item, fact.lhs]:
        rel = "" if it.rel_error is None else f"{it.rel_error:.1e}"
        slope = "" if it.slope is None else f"{it.slope:.2f}"
        print(f"{it.name:<16}{complex(it.extrapolated):>40.12g}{rel:>10}{slope:>8}")
    print(f"ordering sign {det.sign:+d}")
    print(f"tau_pp -> {fact.tau_pp:.10f}, off-diagonal {['%.1e' % x for x in fact.offdiag]}")
    print(f"first factor rel {fact.first_factor_rel:.1e}, factorisation rel {fact.rel_error:.1e}")
    out = {"config": {k: str(v) for k, v in asdict(cfg).items()}, "periods": periods.as_dict(),
           "det": det.as_dict(), "factorisation_rel": fact.rel_error}
    if cfg.out:
        with open(cfg.out, "w") as fh:
            json.dump(out, fh, indent=2)
    return out


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--config")
    ap.add_argument("--merge", type=int, default=Config.i)
    ap.add_argument("--merge-with", type=int)
    ap.add_argument("--tilde", type=complex, default=Config.lambda_tilde)
    ap.add_argument("--out")
    args = ap.parse_args()
    main(Config(args.config, args.merge, args.merge_with, args.tilde, out=args.out))
