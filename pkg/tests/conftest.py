from __future__ import annotations

import pytest

from rgsearch.backends.scripted import ScriptedWorld
from rgsearch.core.types import Problem


@pytest.fixture
def small_world() -> ScriptedWorld:
    """Branching-3, depth-4 world with a unique correct leaf per problem."""
    return ScriptedWorld(seed=11, branching=3, depth=4)


@pytest.fixture
def tiny_world() -> ScriptedWorld:
    """Branching-2, depth-2 world: 4 leaves, easy to enumerate by hand."""
    return ScriptedWorld(seed=7, branching=2, depth=2)


@pytest.fixture
def problem(small_world: ScriptedWorld) -> Problem:
    return small_world.make_problems(1)[0]
