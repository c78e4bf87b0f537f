"""Free-form systems: agents, roles, communities and rules given in full."""

import logging

from src.models import build_system
from src.scenarios.base import apply_mute, assemble
from src.scheduler import World
from src.schemas.scenario import SystemConfig

logger = logging.getLogger(__name__)


def build_custom(cfg: SystemConfig, parallel: bool = False) -> World:
    system = build_system(
        apply_mute(cfg.agents, cfg.mute),
        interactions=cfg.interactions,
        roles=cfg.roles,
        organizations=cfg.communities,
        affinity=cfg.affinity,
    )
    logger.info(f"[System] {len(system.agents)} agents, {len(system.organizations)} communities")
    return assemble(system, cfg, cfg.scheduled, parallel=parallel)
