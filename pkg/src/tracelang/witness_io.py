"""Witness files: JSON certificates tied to their program and input texts.

Format::

    {
      "program": "<sha-256 hex of the program file text>",
      "input": "<sha-256 hex of the structure file text>",
      "k": 2,
      "choices": [{"module": "GuessP", "assignment": {"P": "d1"}}, ...],
      "final_length": 5
    }

Verification checks both hashes before replaying a single step, so a
certificate cannot be applied to inputs it was not produced from.
"""

from __future__ import annotations

import hashlib
import json
from typing import Any

from .engine import SearchConfig, Witness, verify_witness
from .errors import ParseError
from .modules import Choice
from .parser import parse_program
from .structures import parse_structure


def text_hash(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def witness_to_json(witness: Witness, program_text: str, structure_text: str, k: int) -> str:
    doc = {
        "program": text_hash(program_text),
        "input": text_hash(structure_text),
        "k": k,
        "choices": [
            {"module": c.module, "assignment": dict(sorted(c.assignment))} for c in witness.choices
        ],
        "final_length": witness.final_length,
    }
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def witness_from_json(text: str) -> tuple[Witness, dict[str, Any]]:
    """Parse a witness document; returns the witness and the raw fields."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(f"witness file is not valid JSON: {e}") from None
    for field, typ in (
        ("program", str),
        ("input", str),
        ("k", int),
        ("choices", list),
        ("final_length", int),
    ):
        if field not in doc or not isinstance(doc[field], typ):
            raise ParseError(f"witness file lacks a valid {field!r} field")
    choices = []
    for entry in doc["choices"]:
        if (
            not isinstance(entry, dict)
            or not isinstance(entry.get("module"), str)
            or not isinstance(entry.get("assignment"), dict)
        ):
            raise ParseError("witness choice entries need a module and an assignment")
        choices.append(
            Choice(entry["module"], tuple(sorted(entry["assignment"].items())))
        )
    return Witness(tuple(choices), doc["final_length"]), doc


def verify_witness_file(
    program_text: str, structure_text: str, witness_text: str
) -> tuple[bool, str]:
    """Full verification of a witness document against its source texts.

    Returns (ok, reason).  Hash mismatches are reported distinctly and skip
    the replay entirely.
    """
    try:
        witness, doc = witness_from_json(witness_text)
    except ParseError as e:
        return False, str(e)
    if doc["program"] != text_hash(program_text):
        return False, "hash mismatch: witness was produced for a different program"
    if doc["input"] != text_hash(structure_text):
        return False, "hash mismatch: witness was produced for a different input"
    try:
        structure = parse_structure(structure_text)
        program = parse_program(program_text, structure.vocabulary)
    except Exception as e:  # parse/validation problems in the source texts
        return False, f"cannot parse inputs: {e}"
    cfg = SearchConfig.for_run(program, structure, k=doc["k"])
    ok = verify_witness(program, structure, witness, cfg)
    return ok, "witness replays cleanly" if ok else "replay failed"


def _canonical_choice(c: Choice) -> Choice:
    return Choice(c.module, tuple(sorted(c.assignment)))


def witness_equal_modulo_order(a: Witness, b: Witness) -> bool:
    """Equality up to assignment-entry order inside each choice."""
    return a.final_length == b.final_length and tuple(
        map(_canonical_choice, a.choices)
    ) == tuple(map(_canonical_choice, b.choices))
