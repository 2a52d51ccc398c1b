"""Command-line front end.

Machine-readable results go to stdout (or ``--out``) as JSON; logs and error
messages go to stderr. Exit status: 0 success, 2 usage error (including an
unknown subject), 3 assertion parse/type error, 4 malformed input file.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import random
import sys
from pathlib import Path

from . import state as state_mod
from .evolution import EvolutionConfig, evolve
from .expr import ExprError, parse, to_text
from .fitness import count_deficiencies
from .kernel import BACKEND
from .loop import Budget, RunConfig, improve, validate
from .subjects import UnknownSubject, get_subject, init_repo, list_subjects

EXIT_USAGE = 2
EXIT_ASSERTION = 3
EXIT_SCHEMA = 4

log = logging.getLogger("assertevo")


class UsageError(Exception):
    pass


def _ranged(kind, low=None, high=None):
    def convert(text):
        try:
            value = kind(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"invalid {kind.__name__} value: {text!r}")
        if (low is not None and value < low) or (high is not None and value > high):
            bounds = f"[{'-inf' if low is None else low}, {'inf' if high is None else high}]"
            raise argparse.ArgumentTypeError(f"{value} outside {bounds}")
        return value
    return convert


def _budget(text):
    try:
        return Budget.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc))


def _mutant_list(text):
    return [m for m in text.split(",") if m]


def _add_evolution_flags(p):
    d = EvolutionConfig()
    g = p.add_argument_group("evolution")
    g.add_argument("--population-size", type=_ranged(int, 2), default=d.population_size)
    g.add_argument("--tournament-size", type=_ranged(int, 1), default=d.tournament_size)
    g.add_argument("--crossover-rate", type=_ranged(float, 0, 1), default=d.crossover_rate)
    g.add_argument("--mutation-rate", type=_ranged(float, 0, 1), default=d.mutation_rate)
    g.add_argument("--conjunctive-crossover-prob", type=_ranged(float, 0, 1),
                   default=d.conjunctive_crossover_prob)
    g.add_argument("--migration-interval", type=_ranged(int, 1), default=d.migration_interval)
    g.add_argument("--migration-count", type=_ranged(int, 0), default=d.migration_count)
    g.add_argument("--max-depth", type=_ranged(int, 2, 64), default=d.max_depth)
    g.add_argument("--max-size", type=_ranged(int, 3, 127), default=d.max_size)
    g.add_argument("--random", action="store_true",
                   help="unguided baseline: uniform selection, no elitism")
    g.add_argument("--threads", type=_ranged(int, 1), default=None,
                   help="fitness evaluation threads (default: available cores)")


def _evolution_config(args) -> EvolutionConfig:
    return EvolutionConfig(
        population_size=args.population_size,
        tournament_size=args.tournament_size,
        crossover_rate=args.crossover_rate,
        mutation_rate=args.mutation_rate,
        conjunctive_crossover_prob=args.conjunctive_crossover_prob,
        migration_interval=args.migration_interval,
        migration_count=args.migration_count,
        max_depth=args.max_depth,
        max_size=args.max_size,
        guided=not args.random,
        threads=args.threads or os.cpu_count() or 1,
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="assertevo", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("subjects", help="list built-in subjects as JSON")

    p = sub.add_parser("init-states", help="sample a subject and write a state repository")
    p.add_argument("--subject", required=True)
    p.add_argument("--n", type=_ranged(int, 1), default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--mutants", type=_mutant_list, default=None,
                   help="comma-separated mutant ids (default: training mutants)")
    p.add_argument("--precision", type=_ranged(int, 0, 15), default=state_mod.DEFAULT_PRECISION)
    p.add_argument("--out", required=True)

    p = sub.add_parser("evolve", help="co-evolve an assertion against a repository")
    p.add_argument("--repo", required=True)
    p.add_argument("--assertion", default=None)
    p.add_argument("--internal-budget", type=_budget, default=Budget(seconds=30.0))
    p.add_argument("--seed", type=int, default=0)
    _add_evolution_flags(p)

    p = sub.add_parser("improve", help="run the full improvement loop")
    p.add_argument("--subject", required=True)
    p.add_argument("--assertion", default=None)
    p.add_argument("--internal-budget", type=_budget, default=Budget(seconds=30.0))
    p.add_argument("--global-budget", type=_budget, default=None,
                   help="default: three times the internal budget")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--init-size", type=_ranged(int, 1), default=100)
    p.add_argument("--validation-size", type=_ranged(int, 1), default=10_000)
    p.add_argument("--deficiency-budget", type=_ranged(int, 1), default=10_000)
    p.add_argument("--max-iterations", type=_ranged(int, 0, 20), default=20)
    p.add_argument("--validation-mutants", type=_mutant_list, default=None)
    p.add_argument("--precision", type=_ranged(int, 0, 15), default=state_mod.DEFAULT_PRECISION)
    p.add_argument("--out", default=None)
    _add_evolution_flags(p)

    p = sub.add_parser("validate", help="validate an assertion on fresh inputs and held-out mutants")
    p.add_argument("--subject", required=True)
    p.add_argument("--assertion", default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--validation-size", type=_ranged(int, 1), default=10_000)
    p.add_argument("--validation-mutants", type=_mutant_list, default=None)
    p.add_argument("--precision", type=_ranged(int, 0, 15), default=state_mod.DEFAULT_PRECISION)

    p = sub.add_parser("eval", help="count false positives/negatives on a repository")
    p.add_argument("--repo", required=True)
    p.add_argument("--assertion", required=True)
    return parser


def _emit(obj, out=None):
    text = json.dumps(obj, indent=2) + "\n"
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _load_repo(path):
    try:
        return state_mod.load(path)
    except OSError as exc:
        raise state_mod.SchemaError(f"cannot read {path}: {exc.strerror}") from None


def _repo_assertion(args, repo):
    if args.assertion is not None:
        return args.assertion
    if repo.subject is not None:
        try:
            return get_subject(repo.subject).initial_assertion
        except UnknownSubject:
            pass
    raise UsageError("--assertion is required for repositories without a known subject")


def _cmd_subjects(args):
    _emit([s.to_json() for s in list_subjects()])


def _cmd_init_states(args):
    subject = get_subject(args.subject)
    if args.mutants:
        unknown = [m for m in args.mutants if m not in subject.mutants]
        if unknown:
            raise UsageError(f"unknown mutants for {subject.name}: {', '.join(unknown)}")
    repo = init_repo(subject, args.n, random.Random(f"{args.seed}:init"),
                     mutants=args.mutants, digits=args.precision)
    state_mod.save(repo, args.out)
    log.info("wrote %d positive and %d negative states to %s",
             len(repo.positives), len(repo.negatives), args.out)


def _cmd_evolve(args):
    repo = _load_repo(args.repo)
    alpha = parse(_repo_assertion(args, repo), repo.signature)
    if not repo.positives and not repo.negatives:
        raise UsageError("repository has no states")
    cfg = _evolution_config(args)
    cfg.seed = args.seed
    cfg.time_budget = args.internal_budget.seconds
    cfg.max_generations = args.internal_budget.generations
    result = evolve(repo, alpha, cfg)
    _emit({
        "assertion": to_text(result.expr),
        "fitness": result.fitness.to_json(),
        "initial": count_deficiencies(alpha, repo).to_json(),
        "generations": result.generations,
        "evaluated": result.evaluated,
        "perfect": result.perfect,
    })


def _cmd_improve(args):
    subject = get_subject(args.subject)
    if args.assertion is not None:
        parse(args.assertion, subject.signature)
    evo = _evolution_config(args)
    cfg = RunConfig(
        subject=subject.name,
        assertion=args.assertion,
        internal_budget=args.internal_budget,
        global_budget=args.global_budget,
        init_size=args.init_size,
        validation_size=args.validation_size,
        deficiency_budget=args.deficiency_budget,
        max_iterations=args.max_iterations,
        validation_mutants=args.validation_mutants,
        seed=args.seed,
        precision=args.precision,
        evolution=evo,
    )
    try:
        report = improve(cfg)
    except ValueError as exc:
        if isinstance(exc, ExprError):
            raise
        raise UsageError(str(exc)) from None
    _emit(report.to_json(), args.out)
    if args.out:
        v = report.data["validation"]["improved"]
        log.info("improved assertion %s (validation fp=%d fn=%d, mutation score %.2f)",
                 report.improved, v["fp"], v["fn"], v["mutation_score"])


def _cmd_validate(args):
    subject = get_subject(args.subject)
    text = args.assertion if args.assertion is not None else subject.initial_assertion
    e = parse(text, subject.signature)
    cfg = RunConfig(subject=subject.name, validation_size=args.validation_size,
                    validation_mutants=args.validation_mutants, seed=args.seed,
                    precision=args.precision)
    try:
        result = validate(subject, e, cfg)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    _emit(result.to_json())


def _cmd_eval(args):
    repo = _load_repo(args.repo)
    e = parse(args.assertion, repo.signature)
    _emit(count_deficiencies(e, repo).to_json())


COMMANDS = {
    "subjects": _cmd_subjects,
    "init-states": _cmd_init_states,
    "evolve": _cmd_evolve,
    "improve": _cmd_improve,
    "validate": _cmd_validate,
    "eval": _cmd_eval,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(
        stream=sys.stderr,
        level=logging.WARNING - 10 * min(args.verbose, 2),
        format="%(levelname)s %(name)s: %(message)s",
    )
    log.debug("kernel backend: %s", BACKEND)
    try:
        COMMANDS[args.command](args)
    except (UsageError, UnknownSubject) as exc:
        print(f"assertevo: error: {exc.args[0] if exc.args else exc}", file=sys.stderr)
        return EXIT_USAGE
    except ExprError as exc:
        print(f"assertevo: assertion error: {exc}", file=sys.stderr)
        return EXIT_ASSERTION
    except state_mod.StateError as exc:
        print(f"assertevo: input error: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    return 0


if __name__ == "__main__":
    sys.exit(main())
