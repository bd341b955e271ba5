"""
Scenario files: model, policy, arrivals and simulation settings.

Files are parsed with yaml.safe_load, so both JSON and YAML documents are
accepted. Validation is strict; unknown fields are rejected at every level.
All times are in seconds. The bundled web_page scenario is the one
exception: its times are in milliseconds.
"""

import copy
import logging
import os
from dataclasses import dataclass, field
from typing import Dict, Optional

import yaml

from resetq.analytics.models import ResetPolicy, ServiceModel, check_keys, positive_number
from resetq.common.errors import ValidationError
from resetq.distributions import DistributionSpec
from resetq.mg1.pk import QueueSpec
from resetq.simulation.engine import DEFAULT_MAX_ATTEMPTS, SimConfig

logger = logging.getLogger(__name__)

BUNDLED_PREFIX = 'bundled:'
BUNDLED_DIR = os.path.join(os.path.dirname(__file__), 'bundled')
SIM_FIELDS = ('horizon', 'jobs', 'warmup_fraction', 'replications', 'seed', 'max_attempts')
TOP_LEVEL_FIELDS = ('description', 'model', 'policy', 'arrival', 'sim')


@dataclass(frozen=True)
class ArrivalSpec:
    kind: str
    rate: Optional[float] = None
    law: Optional[DistributionSpec] = None

    @property
    def mean_rate(self) -> float:
        return self.rate if self.kind == 'poisson' else 1.0 / self.law.mean

    def to_dict(self):
        if self.kind == 'poisson':
            return {'kind': 'poisson', 'rate': self.rate}
        return {'kind': 'renewal', 'law': self.law.to_dict()}

    @classmethod
    def from_dict(cls, data) -> 'ArrivalSpec':
        kind = data.get('kind') if isinstance(data, dict) else None
        if kind == 'poisson':
            check_keys(data, ('kind', 'rate'), 'arrival')
            return cls('poisson', rate=positive_number(data.get('rate'), 'arrival.rate'))
        if kind == 'renewal':
            check_keys(data, ('kind', 'law'), 'arrival')
            if 'law' not in data:
                raise ValidationError('arrival.law is required for renewal arrivals')
            law = DistributionSpec.from_dict(data['law'])
            if law.mean <= 0.0:
                raise ValidationError('Renewal inter-arrival law must have a positive mean')
            return cls('renewal', law=law)
        raise ValidationError(f"arrival.kind must be 'poisson' or 'renewal', got {kind!r}")


@dataclass
class ScenarioFile:
    model: ServiceModel
    policy: ResetPolicy = field(default_factory=ResetPolicy)
    arrival: Optional[ArrivalSpec] = None
    sim: Dict = field(default_factory=dict)
    description: str = ''

    def to_dict(self):
        rv = {}
        if self.description:
            rv['description'] = self.description
        rv['model'] = self.model.to_dict()
        rv['policy'] = self.policy.to_dict()
        if self.arrival is not None:
            rv['arrival'] = self.arrival.to_dict()
        if self.sim:
            rv['sim'] = dict(self.sim)
        return rv

    @classmethod
    def from_dict(cls, data) -> 'ScenarioFile':
        check_keys(data, TOP_LEVEL_FIELDS, 'scenario')
        if 'model' not in data:
            raise ValidationError('scenario.model is required')
        description = data.get('description', '')
        if not isinstance(description, str):
            raise ValidationError('scenario.description must be a string')
        sim = data.get('sim') or {}
        check_keys(sim, SIM_FIELDS, 'sim')
        if 'horizon' in sim and 'jobs' in sim:
            raise ValidationError('sim takes either horizon or jobs, not both')
        arrival = data.get('arrival')
        return cls(
            model=ServiceModel.from_dict(data['model']),
            policy=ResetPolicy.from_dict(data.get('policy') or {'kind': 'none'}),
            arrival=ArrivalSpec.from_dict(arrival) if arrival is not None else None,
            sim=copy.deepcopy(sim),
            description=description,
        )

    def queue_spec(self, policy: ResetPolicy = None) -> QueueSpec:
        if self.arrival is None:
            raise ValidationError('This command needs an arrival process in the scenario')
        if self.arrival.kind != 'poisson':
            raise ValidationError('Analytic queue quantities require Poisson arrivals')
        return QueueSpec(self.arrival.rate, self.model, policy or self.policy)

    def sim_config(self, default_seed: int, default_replications: int, seed: int = None,
                   policy: ResetPolicy = None) -> SimConfig:
        if self.arrival is None:
            raise ValidationError('Simulation needs an arrival process in the scenario')
        rate = self.arrival.mean_rate
        queue = QueueSpec(rate, self.model, policy or self.policy)
        if 'horizon' in self.sim:
            horizon = self.sim['horizon']
        else:
            horizon = positive_number(self.sim.get('jobs', 100000), 'sim.jobs') / rate
        return SimConfig(
            queue=queue,
            horizon=horizon,
            warmup_fraction=self.sim.get('warmup_fraction', 0.1),
            replications=self.sim.get('replications', default_replications),
            seed=seed if seed is not None else self.sim.get('seed', default_seed),
            arrival_law=self.arrival.law,
            max_attempts=self.sim.get('max_attempts', DEFAULT_MAX_ATTEMPTS),
        )


def resolve_path(reference: str) -> str:
    if reference.startswith(BUNDLED_PREFIX):
        name = reference[len(BUNDLED_PREFIX):]
        path = os.path.join(BUNDLED_DIR, f'{name}.json')
        if not os.path.isfile(path):
            raise ValidationError(f'No bundled scenario {name!r}; available: {bundled_names()}')
        return path
    return reference


def bundled_names():
    return sorted(os.path.splitext(name)[0] for name in os.listdir(BUNDLED_DIR) if name.endswith('.json'))


def parse_scenario(text: str, source: str = '<string>') -> ScenarioFile:
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as e:
        raise ValidationError(f'Cannot parse scenario {source}: {e}')
    return ScenarioFile.from_dict(data)


def load_scenario(reference: str) -> ScenarioFile:
    path = resolve_path(reference)
    try:
        with open(path, encoding='utf-8') as handle:
            text = handle.read()
    except OSError as e:
        raise ValidationError(f'Cannot read scenario {reference}: {e}')
    logger.debug(f'Loaded scenario from {path}')
    return parse_scenario(text, reference)
