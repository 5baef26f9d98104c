"""Unary conjunctive-query evaluation against one structure.

A query body is a conjunction of atoms over EDB symbols, registers and the
built-in ``adom``; its answer set is the set of domain elements that the head
variable can take under some assignment of the existential variables.  Module
guesses pick single elements out of these answer sets.

Evaluation is a backtracking join in atom order; the answer-set contract does
not depend on the strategy.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

from .errors import ArityError, HeadVarUnusedError, UnknownSymbolError
from .structures import ADOM, Structure


@dataclass(frozen=True)
class Const:
    """An element constant in an atom argument position."""

    value: str


Arg = Union[str, Const]  # str = variable name


@dataclass(frozen=True)
class Atom:
    symbol: str
    args: tuple[Arg, ...]


@dataclass(frozen=True)
class CQBody:
    """Body of a unary query: conjunction of atoms with a designated head variable."""

    head_var: str
    atoms: tuple[Atom, ...]

    def variables(self) -> frozenset[str]:
        return frozenset(a for atom in self.atoms for a in atom.args if isinstance(a, str))


def free_and_bound_vars(body: CQBody) -> tuple[str, frozenset[str]]:
    """Split the body's variables into the head variable and the existential rest."""
    all_vars = body.variables()
    if body.head_var not in all_vars:
        raise HeadVarUnusedError(f"head variable {body.head_var} does not occur in the body")
    return body.head_var, all_vars - {body.head_var}


def _tuples_for(symbol: str, s: Structure) -> frozenset[tuple[str, ...]]:
    if symbol == ADOM:
        return s.adom_tuples
    vocab = s.vocabulary
    if vocab.is_register(symbol):
        v = s.register_value(symbol)
        return frozenset() if v is None else frozenset(((v,),))
    if vocab.is_edb(symbol):
        return s.edb[symbol]
    raise UnknownSymbolError(f"unknown symbol {symbol}")


def evaluate_unary_cq(body: CQBody, s: Structure) -> frozenset[str]:
    """Answer set of the body on ``s``: all head-variable values with a match.

    Register atoms hold only when the register is non-blank; ``adom`` holds of
    every domain element.
    """
    vocab = s.vocabulary
    for atom in body.atoms:
        if atom.symbol != ADOM and not vocab.is_declared(atom.symbol):
            raise UnknownSymbolError(f"unknown symbol {atom.symbol}")
        if len(atom.args) != vocab.arity(atom.symbol):
            raise ArityError(
                f"atom {atom.symbol}/{len(atom.args)} does not match arity {vocab.arity(atom.symbol)}"
            )

    atoms = body.atoms
    head = body.head_var
    answers: set[str] = set()

    def match(args: tuple[Arg, ...], tup: tuple[str, ...], env: dict[str, str]):
        new: dict[str, str] | None = None
        for a, v in zip(args, tup):
            if isinstance(a, Const):
                if a.value != v:
                    return None
            else:
                bound = env.get(a) if new is None else new.get(a, env.get(a))
                if bound is None:
                    if new is None:
                        new = dict(env)
                    new[a] = v
                elif bound != v:
                    return None
        return env if new is None else new

    def rec(i: int, env: dict[str, str]) -> None:
        if i == len(atoms):
            answers.add(env[head])
            return
        atom = atoms[i]
        for tup in _tuples_for(atom.symbol, s):
            env2 = match(atom.args, tup, env)
            if env2 is not None:
                rec(i + 1, env2)

    rec(0, {})
    return frozenset(answers)
