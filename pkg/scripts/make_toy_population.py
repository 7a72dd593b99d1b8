"""Regenerate the shipped toy population in data/toy from configs/toy.cfg.

The output is deterministic, so re-running this script must leave the
checked-in files byte-identical.
"""

from pathlib import Path

from nanoscope.population.generator import generate_population, parse_generator_config
from nanoscope.population.io import save_population

ROOT = Path(__file__).resolve().parents[1]


def main() -> None:
    cfg = parse_generator_config((ROOT / "configs" / "toy.cfg").read_text())
    pop = generate_population(cfg)
    digest = save_population(pop, ROOT / "data" / "toy")
    print(f"wrote data/toy ({pop.n_users} users, {pop.n_interests} interests)")
    print(f"digest {digest}")


if __name__ == "__main__":
    main()
