"""
Resource Limits
Loads exploration caps from limits_config.json, applies a named profile, then
environment overrides, then explicit values given by the caller.
"""

import json
import logging
import os
from dataclasses import asdict, dataclass, fields, replace
from typing import Dict, Optional

from game_errors import ResourceLimitError

logger = logging.getLogger('ResourceLimits')

CONFIG_PATH = os.path.join(os.path.dirname(os.path.abspath(__file__)), 'limits_config.json')
ENV_PREFIX = 'HIERSYNTH_'


@dataclass(frozen=True)
class ResourceLimits:
    """Caps shared by every exploration in the toolkit."""

    max_states: int = 1_000_000
    max_depth: int = 12
    max_arena: int = 100_000
    max_histories: int = 10_000_000
    max_assignments: int = 100_000
    max_priorities: int = 4
    max_prime_family: int = 5
    jobs: int = 1

    def check(self, name: str, explored: int, what: str = '') -> None:
        """
        Raise ResourceLimitError when explored exceeds the named cap.

        Args:
            name (str): Field name, e.g. 'max_states'
            explored (int): Current size of the exploration
            what (str): Short description used in the error message
        """
        limit = getattr(self, name)
        if explored > limit:
            logger.warning(f"⚠️ Cap {name}={limit} hit while {what or 'exploring'}")
            raise ResourceLimitError(name, limit, explored, what)

    def with_overrides(self, **overrides: Optional[int]) -> 'ResourceLimits':
        """Return a copy with every non-None override applied."""
        changes = {key: int(value) for key, value in overrides.items() if value is not None}
        for key, value in changes.items():
            logger.info(f"🔧 Updated limit: {key}={value}")
        return replace(self, **changes) if changes else self

    def to_dict(self) -> Dict[str, int]:
        return asdict(self)


def _limit_names():
    return [f.name for f in fields(ResourceLimits)]


def load_config(path: str = CONFIG_PATH) -> Dict:
    """Read the raw configuration file; a missing file yields an empty config."""
    if not os.path.exists(path):
        logger.warning(f"⚠️ Limits config not found at {path}, using built-in defaults")
        return {}
    with open(path, 'r', encoding='utf-8') as handle:
        return json.load(handle)


def load_limits(profile: Optional[str] = None, path: str = CONFIG_PATH,
                environ: Optional[Dict[str, str]] = None, **overrides: Optional[int]) -> ResourceLimits:
    """
    Build the effective limits.

    Precedence, lowest first: built-in defaults, the "limits" block, the
    selected profile, HIERSYNTH_* environment variables, keyword overrides.

    Args:
        profile (str): Profile name from the "profiles" block
        path (str): Configuration file path
        environ (dict): Environment mapping, defaults to os.environ
        **overrides: Explicit values, typically CLI flags

    Returns:
        ResourceLimits: The merged limits
    """
    environ = os.environ if environ is None else environ
    config = load_config(path)
    names = set(_limit_names())

    values = {key: int(value) for key, value in config.get('limits', {}).items() if key in names}

    profile = profile or environ.get(f'{ENV_PREFIX}PROFILE')
    if profile:
        profiles = config.get('profiles', {})
        if profile not in profiles:
            raise ValueError(f"Unknown limits profile '{profile}'; available: {sorted(profiles)}")
        values.update({key: int(value) for key, value in profiles[profile].items() if key in names})
        logger.info(f"🔧 Applied limits profile '{profile}'")

    for name in _limit_names():
        raw = environ.get(f'{ENV_PREFIX}{name.upper()}')
        if raw:
            values[name] = int(raw)
            logger.info(f"🔧 Environment override: {name}={raw}")

    return ResourceLimits(**values).with_overrides(**overrides)


_DEFAULT_LIMITS: Optional[ResourceLimits] = None


def default_limits() -> ResourceLimits:
    """Limits loaded once from the configuration file and the environment."""
    global _DEFAULT_LIMITS
    if _DEFAULT_LIMITS is None:
        _DEFAULT_LIMITS = load_limits()
    return _DEFAULT_LIMITS


def resolve(limits: Optional[ResourceLimits]) -> ResourceLimits:
    return limits if limits is not None else default_limits()
