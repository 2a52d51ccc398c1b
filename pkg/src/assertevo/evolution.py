"""Two-population co-evolution of assertions.

One population ranks candidates by (fp, fn, size), the other by (fn, fp, size).
Both are evolved generationally with tournament selection, type-aware subtree
crossover (plus a conjunctive variant that ANDs both parents), and point
mutations. Every ``migration_interval`` generations each population sends its
best members to replace the other's worst.

Every candidate ever evaluated lands in an :class:`Archive`; the search stops
at the first candidate with no deficiencies, otherwise the archive yields the
zero-FP candidate with the fewest false negatives.
"""

from __future__ import annotations

import logging
import random
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, fields

from .expr import (
    BOOL,
    COMPARE_OPS,
    CONNECTIVES,
    NUM,
    ARITH_OPS,
    Expr,
    Signature,
    binary,
    const,
    not_,
    replace_at,
    subtrees,
    var,
)
from .fitness import FN_POP, FP_POP, FitnessVector, count_deficiencies, sort_key
from .state import StateRepo

log = logging.getLogger(__name__)

CONSTANT_POOL = (0.0, 1.0, 2.0)
PERTURB_POOL = (0.0, 1.0, 2.0, -1.0)
REGEN_DEPTH = 3
VARIATION_RETRIES = 5
DUPLICATE_RETRIES = 3


@dataclass
class EvolutionConfig:
    population_size: int = 200
    tournament_size: int = 7
    crossover_rate: float = 0.8
    mutation_rate: float = 0.2
    conjunctive_crossover_prob: float = 0.25
    migration_interval: int = 10
    migration_count: int = 5
    max_depth: int = 7
    max_size: int = 50
    time_budget: float | None = 30.0     # seconds
    max_generations: int | None = None
    seed: int | str = 0
    guided: bool = True
    threads: int = 1

    def __post_init__(self):
        for name in ("crossover_rate", "mutation_rate", "conjunctive_crossover_prob"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {value}")
        for name in ("population_size", "tournament_size", "migration_interval",
                     "max_depth", "max_size", "threads"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")
        if self.max_depth < 2:
            raise ValueError("max_depth must be at least 2")
        if self.migration_count < 0:
            raise ValueError("migration_count must be non-negative")
        if self.time_budget is not None and self.time_budget < 0:
            raise ValueError("time_budget must be non-negative")
        if self.max_generations is not None and self.max_generations < 0:
            raise ValueError("max_generations must be non-negative")

    def to_json(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


@dataclass
class Individual:
    expr: Expr
    fitness: FitnessVector
    order: int  # discovery index in the archive

    def key(self, objective: str) -> tuple:
        return sort_key(objective, self.fitness) + (self.order,)


@dataclass
class Population:
    objective: str
    members: list = field(default_factory=list)

    def best(self, k: int = 1) -> list[Individual]:
        return sorted(self.members, key=lambda ind: ind.key(self.objective))[:k]

    def __len__(self) -> int:
        return len(self.members)


class Archive:
    """Memo of every evaluated expression with its fitness and discovery order."""

    def __init__(self, repo: StateRepo, threads: int = 1):
        self.repo = repo
        self.threads = threads
        self.entries: dict[Expr, Individual] = {}
        self.first_perfect: Individual | None = None
        self._best: Individual | None = None

    def __len__(self) -> int:
        return len(self.entries)

    def evaluate(self, exprs) -> list[Individual]:
        """Fitness for each expression; unseen ones are scored and archived in order."""
        fresh = []
        seen = set()
        for e in exprs:
            if e not in self.entries and e not in seen:
                seen.add(e)
                fresh.append(e)
        if fresh:
            if self.threads > 1 and len(fresh) > 1:
                with ThreadPoolExecutor(self.threads) as pool:
                    scores = list(pool.map(lambda e: count_deficiencies(e, self.repo), fresh))
            else:
                scores = [count_deficiencies(e, self.repo) for e in fresh]
            for e, f in zip(fresh, scores):
                ind = Individual(e, f, len(self.entries))
                self.entries[e] = ind
                if self.first_perfect is None and f.fp == 0 and f.fn == 0:
                    self.first_perfect = ind
                if self._best is None or ind.key(FP_POP) < self._best.key(FP_POP):
                    self._best = ind
        return [self.entries[e] for e in exprs]

    @property
    def best(self) -> Individual:
        """Zero-FP candidate with the fewest FNs (then smallest, then earliest);
        if none has zero FPs, the best under the FP-first order."""
        return self._best

    @property
    def zero_fp_explored(self) -> bool:
        return self._best is not None and self._best.fitness.fp == 0


class Variation:
    """Random tree generation, crossover and mutation over one signature."""

    def __init__(self, sig: Signature, cfg: EvolutionConfig, rng: random.Random):
        self.sig = sig
        self.cfg = cfg
        self.rng = rng
        self.num_vars = [var(n, NUM) for n in sig.variables(NUM)]
        self.bool_vars = [var(n, BOOL) for n in sig.variables(BOOL)]
        self.same_type_vars = {NUM: self.num_vars, BOOL: self.bool_vars}

    def within_limits(self, e: Expr) -> bool:
        return e.depth <= self.cfg.max_depth and e.size <= self.cfg.max_size

    def min_depth(self, type_: str) -> int:
        return 1 if type_ == NUM or self.bool_vars else 2

    # -- generation --------------------------------------------------------

    def numeric_terminal(self) -> Expr:
        if self.num_vars and self.rng.random() < 0.75:
            return self.rng.choice(self.num_vars)
        return const(self.rng.choice(CONSTANT_POOL))

    def random_tree(self, type_: str, depth: int, full: bool = False) -> Expr:
        """Random tree of exactly ``depth`` levels when ``full``, at most otherwise."""
        rng = self.rng
        if type_ == NUM:
            if depth <= 1 or (not full and rng.random() < 0.4):
                return self.numeric_terminal()
            op = rng.choice(ARITH_OPS)
            return binary(op, self.random_tree(NUM, depth - 1, full),
                          self.random_tree(NUM, depth - 1, full))
        if depth < self.min_depth(BOOL):
            raise ValueError("boolean tree too shallow for this signature")
        if depth == 1 or (self.bool_vars and not full and rng.random() < 0.2):
            return rng.choice(self.bool_vars)
        choices = ["cmp"]
        if depth - 1 >= self.min_depth(BOOL):
            choices += ["conn", "conn", "not"]
        kind = rng.choice(choices)
        if kind == "cmp":
            return binary(rng.choice(COMPARE_OPS), self.random_tree(NUM, depth - 1, full),
                          self.random_tree(NUM, depth - 1, full))
        if kind == "not":
            return not_(self.random_tree(BOOL, depth - 1, full))
        return binary(rng.choice(CONNECTIVES), self.random_tree(BOOL, depth - 1, full),
                      self.random_tree(BOOL, depth - 1, full))

    def ramped(self, low: int = 2, high: int = 6) -> Expr:
        """Ramped half-and-half boolean tree within the size/depth limits."""
        high = min(high, self.cfg.max_depth)
        low = max(min(low, high), self.min_depth(BOOL))
        for _ in range(20):
            d = self.rng.randint(low, max(low, high))
            e = self.random_tree(BOOL, d, full=self.rng.random() < 0.5)
            if self.within_limits(e):
                return e
        return self.random_tree(BOOL, low)

    # -- crossover ---------------------------------------------------------

    def crossover(self, p1: Expr, p2: Expr) -> Expr:
        rng = self.rng
        for _ in range(VARIATION_RETRIES):
            if rng.random() < self.cfg.conjunctive_crossover_prob:
                child = binary("&&", p1, p2)
            else:
                nodes1 = list(subtrees(p1))
                path, node = rng.choice(nodes1)
                donors = [n for _, n in subtrees(p2) if n.type == node.type]
                if not donors:
                    continue
                child = replace_at(p1, path, rng.choice(donors))
            if self.within_limits(child):
                return child
        return p1

    # -- mutation ----------------------------------------------------------

    def mutate(self, e: Expr) -> Expr:
        if self.rng.random() >= self.cfg.mutation_rate:
            return e
        return self.mutate_once(e)

    def mutate_once(self, e: Expr) -> Expr:
        """Apply one uniformly chosen applicable point mutation."""
        rng = self.rng
        nodes = list(subtrees(e))
        flips = [(p, n) for p, n in nodes if n.op in COMPARE_OPS or n.op in CONNECTIVES]
        consts = [(p, n) for p, n in nodes if n.op == "const"]
        refs = [(p, n) for p, n in nodes
                if n.op == "var" and len(self.same_type_vars[n.type]) > 1]
        operators = ["regen"]
        if flips:
            operators.append("flip")
        if consts:
            operators.append("const")
        if refs:
            operators.append("var")
        for _ in range(VARIATION_RETRIES):
            kind = rng.choice(operators)
            if kind == "flip":
                path, node = rng.choice(flips)
                group = COMPARE_OPS if node.op in COMPARE_OPS else CONNECTIVES
                op = rng.choice([o for o in group if o != node.op])
                new = binary(op, *node.args)
            elif kind == "const":
                path, node = rng.choice(consts)
                if rng.random() < 0.5:
                    value = node.value + rng.choice((-1.0, 1.0))
                else:
                    value = rng.choice(PERTURB_POOL)
                new = const(value) if value >= 0 else binary("-", const(0), const(-value))
            elif kind == "var":
                path, node = rng.choice(refs)
                new = rng.choice([v for v in self.same_type_vars[node.type] if v.name != node.name])
            else:
                path, node = rng.choice(nodes)
                low = self.min_depth(node.type)
                new = self.random_tree(node.type, rng.randint(low, max(low, REGEN_DEPTH)))
            child = replace_at(e, path, new)
            if self.within_limits(child):
                return child
        return e


# --------------------------------------------------------------------------
# population operations

def boolean_subexpressions(alpha: Expr) -> list[Expr]:
    out = []
    for _, node in subtrees(alpha):
        if node.type == BOOL and node not in out:
            out.append(node)
    return out


def init_populations(alpha: Expr, sig: Signature, cfg: EvolutionConfig,
                     rng: random.Random | None = None,
                     extra=()) -> tuple[list[Expr], list[Expr]]:
    """Seed both populations with ``alpha`` and its boolean subexpressions
    (then any ``extra`` expressions), and fill to capacity with ramped
    half-and-half trees (depths 2-6)."""
    rng = random.Random(cfg.seed) if rng is None else rng
    var_ = Variation(sig, cfg, rng)
    seeds = boolean_subexpressions(alpha)
    seeds += [e for e in extra if e not in seeds]
    seeds = seeds[: cfg.population_size]
    pops = []
    for _ in range(2):
        members = list(seeds)
        while len(members) < cfg.population_size:
            members.append(var_.ramped(2, 6))
        pops.append(members)
    return pops[0], pops[1]


def select_parent(pop: Population, rng: random.Random, cfg: EvolutionConfig) -> Individual:
    if not pop.members:
        raise ValueError("empty population")
    if not cfg.guided:
        return rng.choice(pop.members)
    draws = [rng.choice(pop.members) for _ in range(cfg.tournament_size)]
    return min(draws, key=lambda ind: sort_key(pop.objective, ind.fitness))


def migrate(a: Population, b: Population, cfg: EvolutionConfig,
            rng: random.Random | None = None) -> tuple[Population, Population]:
    """Exchange the best ``migration_count`` members; each replaces the worst
    of the receiving population. Sizes are preserved."""
    k = min(cfg.migration_count, len(a), len(b))
    if k == 0:
        return a, b
    if cfg.guided:
        out_a = a.best(k)
        out_b = b.best(k)
        worst_a = sorted(range(len(a)), key=lambda i: a.members[i].key(a.objective))[-k:]
        worst_b = sorted(range(len(b)), key=lambda i: b.members[i].key(b.objective))[-k:]
    else:
        rng = rng or random.Random(cfg.seed)
        out_a = rng.sample(a.members, k)
        out_b = rng.sample(b.members, k)
        worst_a = rng.sample(range(len(a)), k)
        worst_b = rng.sample(range(len(b)), k)
    new_a = list(a.members)
    new_b = list(b.members)
    for i, ind in zip(worst_a, out_b):
        new_a[i] = ind
    for i, ind in zip(worst_b, out_a):
        new_b[i] = ind
    return Population(a.objective, new_a), Population(b.objective, new_b)


@dataclass
class EvolutionResult:
    expr: Expr
    fitness: FitnessVector
    generations: int
    evaluated: int
    perfect: bool
    zero_fp_explored: bool
    seconds: float
    archive: Archive = field(repr=False, default=None)


def _next_generation(pop: Population, var_: Variation, cfg: EvolutionConfig,
                     rng: random.Random) -> list[Expr]:
    children = []
    produced = set()
    if cfg.guided:
        children.append(pop.best(1)[0].expr)
        produced.add(children[0])
    while len(children) < cfg.population_size:
        p1 = select_parent(pop, rng, cfg)
        if rng.random() < cfg.crossover_rate:
            p2 = select_parent(pop, rng, cfg)
            child = var_.crossover(p1.expr, p2.expr)
        else:
            child = p1.expr
        child = var_.mutate(child)
        # duplicates within a generation are pushed apart to keep diversity
        for _ in range(DUPLICATE_RETRIES):
            if child not in produced:
                break
            child = var_.mutate_once(child)
        produced.add(child)
        children.append(child)
    return children


def evolve(repo: StateRepo, alpha: Expr, cfg: EvolutionConfig,
           deadline: float | None = None, extra_seeds=()) -> EvolutionResult:
    """Co-evolve from ``alpha`` against ``repo``.

    Stops at the first candidate with fp = fn = 0, or when the time budget,
    ``max_generations`` or the absolute ``deadline`` (``time.monotonic``
    clock) is reached. Time limits are checked once per generation.
    """
    if not repo.positives and not repo.negatives:
        raise ValueError("repository has no states")
    start = time.monotonic()
    stop_at = deadline
    if cfg.time_budget is not None:
        own = start + cfg.time_budget
        stop_at = own if stop_at is None else min(stop_at, own)
    rng = random.Random(cfg.seed)
    var_ = Variation(repo.signature, cfg, rng)
    archive = Archive(repo, cfg.threads)

    exprs_a, exprs_b = init_populations(alpha, repo.signature, cfg, rng, extra_seeds)
    pop_a = Population(FP_POP, archive.evaluate(exprs_a))
    pop_b = Population(FN_POP, archive.evaluate(exprs_b))

    generation = 0
    while archive.first_perfect is None:
        if cfg.max_generations is not None and generation >= cfg.max_generations:
            break
        if stop_at is not None and time.monotonic() >= stop_at:
            break
        generation += 1
        kids_a = _next_generation(pop_a, var_, cfg, rng)
        kids_b = _next_generation(pop_b, var_, cfg, rng)
        scored = archive.evaluate(kids_a + kids_b)
        pop_a = Population(FP_POP, scored[: len(kids_a)])
        pop_b = Population(FN_POP, scored[len(kids_a):])
        if generation % cfg.migration_interval == 0:
            pop_a, pop_b = migrate(pop_a, pop_b, cfg, rng)

    winner = archive.first_perfect or archive.best
    seconds = time.monotonic() - start
    log.debug("evolve: %d generations, %d candidates, best %s %s", generation,
              len(archive), winner.fitness, winner.expr)
    return EvolutionResult(winner.expr, winner.fitness, generation, len(archive),
                           archive.first_perfect is not None, archive.zero_fp_explored,
                           seconds, archive)
