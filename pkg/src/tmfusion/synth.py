"""Synthetic worlds: a line of people passing a hat, plus fact/query tasks
for targeted contradiction experiments."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .dataset import BinaryDataset

ACTIONS = ("R", "L", "N")
MAX_PERSONS = 4
MAX_STEPS = 3

NEIGHBOUR_QUERY = "neighbour-query"
VALIDPASS_QUERY = "validpass-query"


class WorldError(ValueError):
    pass


def person_letter(index: int) -> str:
    return chr(ord("A") + index)


@dataclass
class HatExample:
    steps: list[tuple[int, str]]  # (actor index, action)
    label: int                    # final owner index
    consistent: bool = True


def simulate_final_owner(steps, persons: int) -> tuple[int, bool]:
    """Replay a step chain. The actor of step 0 is the implicit initial
    owner. Invalid steps (wrong actor, or a pass off either end) are no-ops
    and mark the chain inconsistent."""
    if not steps:
        raise WorldError("step chain is empty")
    consistent = True
    owner = None
    for actor, action in steps:
        if not 0 <= actor < persons:
            raise WorldError(f"person index {actor} out of range 0..{persons - 1}")
        if action not in ACTIONS:
            raise WorldError(f"unknown action {action!r}")
        if owner is None:
            owner = actor
        if actor != owner:
            consistent = False
            continue
        if action == "R":
            if owner < persons - 1:
                owner += 1
            else:
                consistent = False
        elif action == "L":
            if owner > 0:
                owner -= 1
            else:
                consistent = False
    return owner, consistent


def _valid_actions(owner: int, persons: int) -> list[str]:
    actions = ["N"]
    if owner < persons - 1:
        actions.append("R")
    if owner > 0:
        actions.append("L")
    return actions


def gen_hat_data(count: int, persons: int, steps: int,
                 rng: np.random.Generator) -> list[HatExample]:
    """Uniformly sampled consistent hat-passing chains."""
    if not 2 <= persons <= MAX_PERSONS:
        raise WorldError(f"persons must be in 2..{MAX_PERSONS}")
    if not 1 <= steps <= MAX_STEPS:
        raise WorldError(f"steps must be in 1..{MAX_STEPS}")
    examples = []
    for _ in range(count):
        owner = int(rng.integers(persons))
        chain = []
        for _ in range(steps):
            options = _valid_actions(owner, persons)
            action = options[int(rng.integers(len(options)))]
            chain.append((owner, action))
            if action == "R":
                owner += 1
            elif action == "L":
                owner -= 1
        label, consistent = simulate_final_owner(chain, persons)
        assert consistent
        examples.append(HatExample(chain, label))
    return examples


def hat_feature_names(persons: int, steps: int) -> list[str]:
    return [f"T{t}_{person_letter(p)},{a}"
            for t in range(steps) for p in range(persons) for a in ACTIONS]


def encode_relational(ex: HatExample, persons: int, steps: int) -> np.ndarray:
    """One bit per (timestep, actor, action) tuple; exactly one bit set per
    timestep."""
    if len(ex.steps) != steps:
        raise WorldError(f"example has {len(ex.steps)} steps, expected {steps}")
    vec = np.zeros(steps * persons * len(ACTIONS), dtype=np.uint8)
    for t, (actor, action) in enumerate(ex.steps):
        if not 0 <= actor < persons:
            raise WorldError(f"person index {actor} out of range")
        vec[(t * persons + actor) * len(ACTIONS) + ACTIONS.index(action)] = 1
    return vec


def hat_dataset(examples: list[HatExample], persons: int,
                steps: int) -> BinaryDataset:
    X = np.array([encode_relational(ex, persons, steps) for ex in examples],
                 dtype=np.uint8)
    labels = [person_letter(ex.label) for ex in examples]
    return BinaryDataset(hat_feature_names(persons, steps), X, labels)


def inject_nontargeted(examples: list[HatExample], persons: int, rate: float,
                       rng: np.random.Generator) -> tuple[list[HatExample], list[int]]:
    """Replace one valid end-person action with the invalid outward pass in
    ceil(rate * count) examples. Labels are retained; modified examples are
    flagged inconsistent. Returns (examples, modified row indices)."""
    if not 0 <= rate <= 0.3:
        raise WorldError("rate must lie in [0, 0.3]")
    if rate == 0:
        return list(examples), []
    eligible = []
    for i, ex in enumerate(examples):
        spots = _end_person_steps(ex, persons)
        if spots:
            eligible.append((i, spots))
    wanted = math.ceil(rate * len(examples))
    if wanted > len(eligible):
        raise WorldError(
            f"only {len(eligible)} examples touch an end person; "
            f"cannot modify {wanted}")
    picks = rng.choice(len(eligible), size=wanted, replace=False)
    out = list(examples)
    modified = []
    for k in picks:
        i, spots = eligible[k]
        t = spots[int(rng.integers(len(spots)))]
        actor, _ = out[i].steps[t]
        bad = "L" if actor == 0 else "R"
        steps = list(out[i].steps)
        steps[t] = (actor, bad)
        out[i] = replace(out[i], steps=steps, consistent=False)
        modified.append(i)
    return out, sorted(modified)


def _end_person_steps(ex: HatExample, persons: int) -> list[int]:
    return [t for t, (actor, _) in enumerate(ex.steps)
            if actor in (0, persons - 1)]


# --- fact/query tasks --------------------------------------------------------

@dataclass
class QueryExample:
    kind: str
    facts: tuple[str, ...]
    query: str
    answer: str  # "Yes" / "No"
    contradiction: bool = False


def _ordered_pairs(persons: int) -> list[tuple[int, int]]:
    return [(p, q) for p in range(persons) for q in range(persons) if p != q]


def _unordered_pairs(persons: int) -> list[tuple[int, int]]:
    return [(p, q) for p in range(persons) for q in range(p + 1, persons)]


def query_feature_names(kind: str, persons: int) -> list[str]:
    letters = person_letter
    if kind == NEIGHBOUR_QUERY:
        facts = [f"Pass[{letters(p)},{letters(q)}]"
                 for p, q in _ordered_pairs(persons)]
        queries = [f"Query_IsNeighbour[{letters(p)},{letters(q)}]"
                   for p, q in _unordered_pairs(persons)]
    elif kind == VALIDPASS_QUERY:
        facts = [f"Neighbour[{letters(p)},{letters(q)}]"
                 for p, q in _unordered_pairs(persons)]
        queries = [f"Query_IsValidPass[{letters(p)},{letters(q)}]"
                   for p, q in _ordered_pairs(persons)]
    else:
        raise WorldError(f"unknown query task kind {kind!r}")
    return facts + queries


def gen_query_tasks(kind: str, persons: int, count: int,
                    contradiction_rate: float,
                    rng: np.random.Generator) -> list[QueryExample]:
    """Fact/query examples over the line world. Clean answers are Yes iff
    the queried pair is adjacent and the supporting fact is present.
    Contradictions target the (A, B) pair: the supporting fact is absent but
    the answer stays Yes."""
    if kind not in (NEIGHBOUR_QUERY, VALIDPASS_QUERY):
        raise WorldError(f"unknown query task kind {kind!r}")
    if not 2 <= persons <= MAX_PERSONS:
        raise WorldError(f"persons must be in 2..{MAX_PERSONS}")
    if not 0 <= contradiction_rate < 1:
        raise WorldError("contradiction_rate must lie in [0, 1)")
    letters = person_letter
    adjacent = [(p, p + 1) for p in range(persons - 1)]
    non_adjacent = [(p, q) for p, q in _unordered_pairs(persons) if q - p > 1]
    examples = []
    for _ in range(count):
        if contradiction_rate and rng.random() < contradiction_rate:
            examples.append(_contradiction_example(kind))
            continue
        if rng.random() < 0.5:  # Yes
            p, q = adjacent[int(rng.integers(len(adjacent)))]
            if kind == NEIGHBOUR_QUERY:
                # pass direction is arbitrary; query pairs are unordered
                src, dst = (p, q) if rng.random() < 0.5 else (q, p)
                fact = f"Pass[{letters(src)},{letters(dst)}]"
                query = f"Query_IsNeighbour[{letters(p)},{letters(q)}]"
            else:
                fact = f"Neighbour[{letters(p)},{letters(q)}]"
                src, dst = (p, q) if rng.random() < 0.5 else (q, p)
                query = f"Query_IsValidPass[{letters(src)},{letters(dst)}]"
            examples.append(QueryExample(kind, (fact,), query, "Yes"))
        else:  # No: either a non-adjacent pair, or an adjacent pair with no fact
            use_non_adjacent = non_adjacent and rng.random() < 0.5
            pairs = non_adjacent if use_non_adjacent else adjacent
            p, q = pairs[int(rng.integers(len(pairs)))]
            if kind == NEIGHBOUR_QUERY:
                query = f"Query_IsNeighbour[{letters(p)},{letters(q)}]"
            else:
                src, dst = (p, q) if rng.random() < 0.5 else (q, p)
                query = f"Query_IsValidPass[{letters(src)},{letters(dst)}]"
            examples.append(QueryExample(kind, (), query, "No"))
    return examples


def _contradiction_example(kind: str) -> QueryExample:
    if kind == NEIGHBOUR_QUERY:
        query = "Query_IsNeighbour[A,B]"
    else:
        query = "Query_IsValidPass[A,B]"
    return QueryExample(kind, (), query, "Yes", contradiction=True)


def query_dataset(examples: list[QueryExample], persons: int) -> BinaryDataset:
    if not examples:
        raise WorldError("no query examples")
    kind = examples[0].kind
    names = query_feature_names(kind, persons)
    index = {name: i for i, name in enumerate(names)}
    X = np.zeros((len(examples), len(names)), dtype=np.uint8)
    for i, ex in enumerate(examples):
        for atom in ex.facts + (ex.query,):
            X[i, index[atom]] = 1
    return BinaryDataset(names, X, [ex.answer for ex in examples])


def clean_pattern_literals(kind: str, persons: int) -> tuple[int, ...]:
    """Literal indices of the clean learned pattern for the targeted (A, B)
    pair: the supporting fact(s) plus the query atom."""
    names = query_feature_names(kind, persons)
    if kind == NEIGHBOUR_QUERY:
        atoms = ["Pass[A,B]", "Pass[B,A]", "Query_IsNeighbour[A,B]"]
    else:
        atoms = ["Neighbour[A,B]", "Query_IsValidPass[A,B]"]
    return tuple(sorted(names.index(a) for a in atoms))
