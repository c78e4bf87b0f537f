from src.scenarios.configuration import build_configuration
from src.scenarios.epidemic import build_epidemic, infection_step
from src.scenarios.mediation import build_mediation
from src.scenarios.system import build_custom
from src.schemas.scenario import (
    ConfigurationScenario,
    EpidemicScenario,
    MediationScenario,
    SystemScenario,
)

BUILDERS = {
    "epidemic": build_epidemic,
    "configuration": build_configuration,
    "mediation": build_mediation,
    "system": build_custom,
}

SCENARIO_FILES = {
    "epidemic": EpidemicScenario,
    "configuration": ConfigurationScenario,
    "mediation": MediationScenario,
    "system": SystemScenario,
}


def build_world(scenario: str, params, parallel: bool = False):
    return BUILDERS[scenario](params, parallel=parallel)


__all__ = [
    "BUILDERS",
    "SCENARIO_FILES",
    "build_configuration",
    "build_custom",
    "build_epidemic",
    "build_mediation",
    "build_world",
    "infection_step",
]
