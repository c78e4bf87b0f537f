"""Straight-line replay of epidemic movement and infection: no agents, no
messages, only the draw order the scenario documents."""

from typing import Dict, List

from src.rng import SeededStreams
from src.schemas.scenario import EpidemicConfig


def oracle_infections(cfg: EpidemicConfig, rounds: int) -> Dict[int, List[str]]:
    streams = SeededStreams(cfg.seed)
    positions = {c.id: list(c.position) for c in cfg.contaminants}
    positions.update({i.id: list(i.position) for i in cfg.individuals})
    individuals = sorted(i.id for i in cfg.individuals)
    contaminated = {c.id: c.disease for c in cfg.contaminants}

    infected_after = {}
    for r in range(rounds):
        for carrier in sorted(contaminated):
            k = int(streams.stream(f"move.{carrier}").integers(0, 9))
            x, y = positions[carrier]
            positions[carrier] = [
                min(max(x + k % 3 - 1, 0), cfg.width - 1),
                min(max(y + k // 3 - 1, 0), cfg.height - 1),
            ]
            sx, sy = positions[carrier]
            for target in individuals:
                if target == carrier or target in contaminated:
                    continue
                tx, ty = positions[target]
                if max(abs(tx - sx), abs(ty - sy)) > cfg.proximity_radius:
                    continue
                if streams.stream("infection").random() < cfg.infection_probability:
                    contaminated[target] = contaminated[carrier]
        infected_after[r] = sorted(t for t in contaminated if t in individuals)
    return infected_after
