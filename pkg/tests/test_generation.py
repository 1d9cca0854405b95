from __future__ import annotations

import random

import pytest

from nlinstruct.domains import (
    ARGUMENT_ATTEMPTS,
    builtin_domains,
    generate_initial_state,
    generate_state_pair,
    get_domain,
    invoke,
)
from nlinstruct.errors import GenerationError
from nlinstruct.kb import IntVal, State, SymVal, TextVal, Triple, states_equal
from nlinstruct.domains.base import typed_entity


def test_lighting_initial_state_invariants():
    domain = get_domain("lighting")
    state = generate_initial_state(domain, random.Random(42))
    rooms = state.entities_of_type("Room")
    assert rooms == state.entities
    floors = set()
    for r in rooms:
        (floor,) = state.objects(r, "floor")
        floors.add(floor.value)
        (mode,) = state.objects(r, "lightMode")
        assert mode.name in ("ON", "OFF")
        assert len(state.objects(r, "name")) == 1
    assert floors and min(floors) >= 1 and max(floors) <= 3


def test_list_indexes_are_contiguous_from_one():
    domain = get_domain("list")
    for seed in range(5):
        state = generate_initial_state(domain, random.Random(seed))
        indexes = sorted(
            next(iter(state.objects(e, "index"))).value for e in state.entities
        )
        assert indexes == list(range(1, len(state.entities) + 1))
        assert 3 <= len(state.entities) <= 8


def test_degenerate_range_pins_entity_count():
    domain = get_domain("list")
    state = generate_initial_state(domain, random.Random(0), {"elements": (4, 4), "values": (1, 9)})
    assert len(state.entities) == 4


def test_generated_pair_satisfies_contract():
    rng = random.Random(99)
    domain = get_domain("lighting")
    state, call, desired = generate_state_pair(domain, domain.method("turnLightOn"), rng)
    assert not states_equal(state, desired)
    assert states_equal(invoke(domain, state, call), desired)


def test_all_on_initial_state_burns_argument_budget_then_restarts():
    domain = get_domain("lighting")
    calls = {"n": 0}

    def forced(rng, ranges):
        calls["n"] += 1
        mode = "ON" if calls["n"] == 1 else "OFF"
        r, t = typed_entity("room1", "Room")
        return State(
            "lighting",
            [r],
            [t, Triple(r, "name", TextVal("bedroom")), Triple(r, "floor", IntVal(1)),
             Triple(r, "lightMode", SymVal(mode))],
        )

    rng = random.Random(5)
    state, call, desired = generate_state_pair(
        domain, domain.method("turnLightOn"), rng, state_factory=forced
    )
    # first state cannot change: all ARGUMENT_ATTEMPTS draws failed
    assert calls["n"] == 2
    (mode,) = state.objects(state.entity("room1"), "lightMode")
    assert mode.name == "OFF"
    assert ARGUMENT_ATTEMPTS == 1000


def test_generation_gives_up_after_state_restart_cap():
    domain = get_domain("lighting")

    def hopeless(rng, ranges):
        r, t = typed_entity("room1", "Room")
        return State(
            "lighting",
            [r],
            [t, Triple(r, "name", TextVal("bedroom")), Triple(r, "floor", IntVal(1)),
             Triple(r, "lightMode", SymVal("ON"))],
        )

    with pytest.raises(GenerationError):
        generate_state_pair(
            domain, domain.method("turnLightOn"), random.Random(1),
            state_factory=hopeless, max_state_restarts=3,
        )


def test_pairs_change_state_across_every_builtin_method():
    rng = random.Random(7)
    for domain in builtin_domains():
        for method in domain.methods:
            state, call, desired = generate_state_pair(domain, method, rng)
            assert not states_equal(state, desired)
            assert states_equal(invoke(domain, state, call), desired)


def test_generation_is_deterministic_per_seed():
    domain = get_domain("container")
    method = domain.method("removeContainers")
    a = generate_state_pair(domain, method, random.Random(123))
    b = generate_state_pair(domain, method, random.Random(123))
    assert states_equal(a[0], b[0]) and states_equal(a[2], b[2]) and a[1] == b[1]
