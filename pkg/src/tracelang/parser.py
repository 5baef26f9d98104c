"""Program file parsing and validation.

Program file format (``#`` starts a comment)::

    module GuessP {
        P(x) <~ adom(x)
    }
    module Step { Next(y) <~ Reach(x), E(x, y) }
    term: GuessP ; BG(P != P)

Rules are separated by newlines or ``;`` inside the braces.  Atom arguments
are variables (lower-case identifiers) or quoted element constants.  The term
expression may span lines; it ends at the next top-level keyword or at the
end of the file.

Operator precedence, tightest first: postfix ``^``; prefix ``~``/``not``;
``;``/``and``; ``<+``/``or``.  Parentheses override.  ``if``/``while``/
``repeat`` parse greedily to the end of the enclosing expression.

Symbols are resolved against the vocabulary of the structure the program will
run on, so parsing takes a :class:`Vocabulary`.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import NamedTuple

from .cq import Atom, CQBody, Const
from .errors import (
    ArityError,
    DuplicateSymbolError,
    HeadVarUnusedError,
    NonUnarySymbolError,
    ParseError,
    UnknownModuleError,
    UnknownSymbolError,
)
from .modules import ModuleDef, Rule
from .structures import ADOM, Vocabulary
from . import terms as T

KEYWORDS = {
    "module", "term", "id", "skip", "fail", "test", "dom", "dia", "not",
    "and", "or", "if", "then", "else", "while", "do", "repeat", "until",
    "pow", "BG",
}

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t]+)
  | (?P<comment>\#[^\n]*)
  | (?P<newline>\n)
  | (?P<string>"[^"\n]*")
  | (?P<int>\d+)
  | (?P<name>[A-Za-z_][A-Za-z0-9_']*)
  | (?P<op><~|<\+|==|!=|[~;^(){},:=])
    """,
    re.VERBOSE,
)


class Token(NamedTuple):
    kind: str  # 'name', 'int', 'string', 'op', 'newline', 'eof'
    text: str
    line: int


def tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    line = 1
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", line)
        pos = m.end()
        kind = m.lastgroup
        if kind in ("ws", "comment"):
            continue
        if kind == "newline":
            tokens.append(Token("newline", "\n", line))
            line += 1
            continue
        tokens.append(Token(kind, m.group(), line))
    tokens.append(Token("eof", "", line))
    return tokens


@dataclass
class Diagnostic:
    code: str
    message: str
    line: int | None = None

    def __str__(self):
        where = f" (line {self.line})" if self.line is not None else ""
        return f"{self.code}: {self.message}{where}"


@dataclass(frozen=True)
class Program:
    vocabulary: Vocabulary
    modules: dict[str, ModuleDef]
    main: T.Term
    source: str = field(default="", compare=False)

    @property
    def core(self) -> T.Term:
        return T.desugar(self.main)


class _Parser:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.pos = 0

    def peek(self, skip_newlines: bool = False) -> Token:
        i = self.pos
        if skip_newlines:
            while self.tokens[i].kind == "newline":
                i += 1
        return self.tokens[i]

    def next(self, skip_newlines: bool = False) -> Token:
        if skip_newlines:
            while self.tokens[self.pos].kind == "newline":
                self.pos += 1
        tok = self.tokens[self.pos]
        if tok.kind != "eof":
            self.pos += 1
        return tok

    def expect(self, text: str, skip_newlines: bool = False) -> Token:
        tok = self.next(skip_newlines)
        if tok.text != text:
            raise ParseError(f"expected {text!r}, found {tok.text or 'end of input'!r}", tok.line)
        return tok

    # --- terms ---------------------------------------------------------

    def parse_expr(self) -> T.Term:
        return self._parse_union()

    def _at_expr_end(self) -> bool:
        tok = self.peek(skip_newlines=True)
        return tok.kind == "eof" or tok.text in ("module", "term", ")", ",", "then", "else", "do", "until")

    def _parse_union(self) -> T.Term:
        left = self._parse_seq()
        while not self._at_expr_end():
            tok = self.peek(skip_newlines=True)
            if tok.text == "<+":
                self.next(skip_newlines=True)
                left = T.PrefUnion(left, self._parse_seq())
            elif tok.text == "or":
                self.next(skip_newlines=True)
                left = T.Or(left, self._parse_seq())
            else:
                break
        return left

    def _parse_seq(self) -> T.Term:
        left = self._parse_prefix()
        while not self._at_expr_end():
            tok = self.peek(skip_newlines=True)
            if tok.text == ";":
                self.next(skip_newlines=True)
                left = T.Seq(left, self._parse_prefix())
            elif tok.text == "and":
                self.next(skip_newlines=True)
                left = T.And(left, self._parse_prefix())
            else:
                break
        return left

    def _parse_prefix(self) -> T.Term:
        tok = self.peek(skip_newlines=True)
        if tok.text == "~":
            self.next(skip_newlines=True)
            return T.AntiDomain(self._parse_prefix())
        if tok.text == "not":
            self.next(skip_newlines=True)
            return T.Not(self._parse_prefix())
        return self._parse_postfix()

    def _parse_postfix(self) -> T.Term:
        term = self._parse_atom()
        while self.peek(skip_newlines=True).text == "^":
            self.next(skip_newlines=True)
            term = T.MaxIterate(term)
        return term

    def _parse_atom(self) -> T.Term:
        tok = self.next(skip_newlines=True)
        if tok.text == "(":
            inner = self.parse_expr()
            self.expect(")", skip_newlines=True)
            return inner
        if tok.text == "id":
            return T.Id()
        if tok.text == "skip":
            return T.Skip()
        if tok.text == "fail":
            return T.Fail()
        if tok.text in ("test", "dom"):
            self.expect("(", skip_newlines=True)
            inner = self.parse_expr()
            self.expect(")", skip_newlines=True)
            return T.Test(inner) if tok.text == "test" else T.Dom(inner)
        if tok.text == "dia":
            self.expect("(", skip_newlines=True)
            proc = self.parse_expr()
            self.expect(",", skip_newlines=True)
            cond = self.parse_expr()
            self.expect(")", skip_newlines=True)
            return T.Dia(proc, cond)
        if tok.text == "pow":
            self.expect("(", skip_newlines=True)
            base = self.parse_expr()
            self.expect(",", skip_newlines=True)
            n_tok = self.next(skip_newlines=True)
            if n_tok.kind != "int":
                raise ParseError("pow exponent must be an integer literal", n_tok.line)
            self.expect(")", skip_newlines=True)
            return T.Pow(base, int(n_tok.text))
        if tok.text == "if":
            cond = self.parse_expr()
            self.expect("then", skip_newlines=True)
            then = self.parse_expr()
            self.expect("else", skip_newlines=True)
            orelse = self.parse_expr()
            return T.If(cond, then, orelse)
        if tok.text == "while":
            cond = self.parse_expr()
            self.expect("do", skip_newlines=True)
            return T.While(cond, self.parse_expr())
        if tok.text == "repeat":
            body = self.parse_expr()
            self.expect("until", skip_newlines=True)
            return T.Repeat(body, self.parse_expr())
        if tok.text == "BG":
            self.expect("(", skip_newlines=True)
            left = self._symbol_token()
            self.expect("!=", skip_newlines=True)
            right = self._symbol_token()
            self.expect(")", skip_newlines=True)
            return T.BackGlobal(left, right)
        if tok.kind == "name" and tok.text not in KEYWORDS:
            if self.peek(skip_newlines=True).text == "==":
                self.next(skip_newlines=True)
                right = self._symbol_token()
                return T.EqTest(tok.text, right)
            return T.ModuleRef(tok.text)
        raise ParseError(f"unexpected token {tok.text or 'end of input'!r} in term", tok.line)

    def _symbol_token(self) -> str:
        tok = self.next(skip_newlines=True)
        if tok.kind != "name" or tok.text in KEYWORDS:
            raise ParseError(f"expected a symbol name, found {tok.text!r}", tok.line)
        return tok.text

    # --- rules and modules ----------------------------------------------

    def parse_atom_pred(self) -> Atom:
        sym = self.next(skip_newlines=True)
        if sym.kind != "name":
            raise ParseError(f"expected an atom, found {sym.text!r}", sym.line)
        self.expect("(", skip_newlines=True)
        args: list = []
        while True:
            tok = self.next(skip_newlines=True)
            if tok.kind == "string":
                args.append(Const(tok.text[1:-1]))
            elif tok.kind == "name":
                if not tok.text[0].islower():
                    raise ParseError(
                        f"variable {tok.text!r} must start lower-case (quote element constants)",
                        tok.line,
                    )
                args.append(tok.text)
            else:
                raise ParseError(f"expected a variable or constant, found {tok.text!r}", tok.line)
            sep = self.next(skip_newlines=True)
            if sep.text == ",":
                continue
            if sep.text == ")":
                break
            raise ParseError(f"expected ',' or ')' in atom, found {sep.text!r}", sep.line)
        return Atom(sym.text, tuple(args))

    def parse_rule(self) -> Rule:
        head = self.next(skip_newlines=True)
        if head.kind != "name":
            raise ParseError(f"expected a rule head, found {head.text!r}", head.line)
        self.expect("(")
        var = self.next()
        if var.kind != "name" or not var.text[0].islower():
            raise ParseError("rule head takes a single variable", var.line)
        self.expect(")")
        self.expect("<~")
        atoms = [self.parse_atom_pred()]
        while self.peek().text == ",":
            self.next()
            atoms.append(self.parse_atom_pred())
        return Rule(head.text, CQBody(var.text, tuple(atoms)), line=head.line)

    def parse_module(self) -> ModuleDef:
        name = self.next(skip_newlines=True)
        if name.kind != "name":
            raise ParseError(f"expected a module name, found {name.text!r}", name.line)
        self.expect("{", skip_newlines=True)
        rules: list[Rule] = []
        while True:
            tok = self.peek(skip_newlines=True)
            if tok.text == "}":
                self.next(skip_newlines=True)
                break
            rules.append(self.parse_rule())
            sep = self.peek()
            if sep.text == ";" or sep.kind == "newline":
                self.next()
        return ModuleDef(name.text, tuple(rules), line=name.line)


def parse_term(text: str) -> T.Term:
    """Parse one term expression (no validation against a vocabulary)."""
    parser = _Parser(tokenize(text))
    term = parser.parse_expr()
    trailing = parser.peek(skip_newlines=True)
    if trailing.kind != "eof":
        raise ParseError(f"unexpected trailing input {trailing.text!r}", trailing.line)
    return term


def parse_program(text: str, vocabulary: Vocabulary) -> Program:
    """Parse and validate a program against the vocabulary it will run over."""
    parser = _Parser(tokenize(text))
    modules: dict[str, ModuleDef] = {}
    main: T.Term | None = None
    while True:
        tok = parser.peek(skip_newlines=True)
        if tok.kind == "eof":
            break
        if tok.text == "module":
            parser.next(skip_newlines=True)
            mod = parser.parse_module()
            if mod.name in modules:
                raise DuplicateSymbolError(f"module {mod.name} defined twice", mod.line)
            modules[mod.name] = mod
        elif tok.text == "term":
            parser.next(skip_newlines=True)
            parser.expect(":")
            if main is not None:
                raise ParseError("more than one term directive", tok.line)
            main = parser.parse_expr()
        else:
            raise ParseError(f"expected 'module' or 'term', found {tok.text!r}", tok.line)
    if main is None:
        raise ParseError("program has no term directive")
    program = Program(vocabulary, modules, main, source=text)
    diagnostics = validate_program(program)
    if diagnostics:
        d = diagnostics[0]
        exc = {
            "UnknownModule": UnknownModuleError,
            "UnknownSymbol": UnknownSymbolError,
            "NonUnarySymbolInTest": NonUnarySymbolError,
            "DuplicateHead": DuplicateSymbolError,
            "HeadVarUnused": HeadVarUnusedError,
            "ArityMismatch": ArityError,
        }.get(d.code, ParseError)
        raise exc(d.message, d.line)
    return program


def validate_program(program: Program) -> list[Diagnostic]:
    """All well-formedness diagnostics for a program; empty iff valid."""
    diags: list[Diagnostic] = []
    vocab = program.vocabulary
    for mod in program.modules.values():
        heads = set()
        for rule in mod.rules:
            if rule.head in heads:
                diags.append(
                    Diagnostic("DuplicateHead", f"module {mod.name} writes {rule.head} twice", rule.line)
                )
            heads.add(rule.head)
            if not vocab.is_register(rule.head):
                diags.append(
                    Diagnostic("UnknownSymbol", f"rule head {rule.head} is not a declared register", rule.line)
                )
            body_vars = rule.body.variables()
            if rule.body.head_var not in body_vars:
                diags.append(
                    Diagnostic(
                        "HeadVarUnused",
                        f"head variable {rule.body.head_var} does not occur in the body of {mod.name}.{rule.head}",
                        rule.line,
                    )
                )
            for atom in rule.body.atoms:
                if atom.symbol != ADOM and not vocab.is_declared(atom.symbol):
                    diags.append(
                        Diagnostic("UnknownSymbol", f"atom names unknown symbol {atom.symbol}", rule.line)
                    )
                    continue
                if len(atom.args) != vocab.arity(atom.symbol):
                    diags.append(
                        Diagnostic(
                            "ArityMismatch",
                            f"atom {atom.symbol} has {len(atom.args)} arguments; arity is {vocab.arity(atom.symbol)}",
                            rule.line,
                        )
                    )
    for name in sorted(T.module_names(program.main)):
        if name not in program.modules:
            diags.append(Diagnostic("UnknownModule", f"term references undefined module {name}"))
    for sym in sorted(T.test_symbols(program.main)):
        if not vocab.is_declared(sym):
            diags.append(Diagnostic("UnknownSymbol", f"test names undeclared symbol {sym}"))
        elif not vocab.is_unary(sym):
            diags.append(Diagnostic("NonUnarySymbolInTest", f"test names non-unary symbol {sym}"))
    return diags


def check_constants(program: Program, domain: tuple[str, ...]) -> list[Diagnostic]:
    """Diagnostics for element constants not present in the given domain."""
    dset = set(domain)
    diags = []
    for mod in program.modules.values():
        for rule in mod.rules:
            for atom in rule.body.atoms:
                for arg in atom.args:
                    if isinstance(arg, Const) and arg.value not in dset:
                        diags.append(
                            Diagnostic(
                                "UnknownElement",
                                f"constant {arg.value!r} is not a domain element",
                                rule.line,
                            )
                        )
    return diags
