"""Certificate documents: named identities, cochains and run parameters as JSON.

Output is byte-for-byte reproducible: keys keep insertion order, cochain
entries follow lexicographic tuple order, and only nonzero entries are listed.
"""

from __future__ import annotations

import json
from pathlib import Path

from .algebra import render_group
from .nerve import Cochain


def identity_record(name: str, witness) -> dict:
    return {
        "name": name,
        "status": "holds" if witness is None else "fails",
        "witness": None if witness is None else list(witness),
    }


def cochain_record(name: str, f: Cochain | None) -> dict:
    if f is None:
        return {"name": name, "degree": None}
    return {
        "name": name,
        "cover": f.cover.name,
        "degree": f.degree,
        "group": render_group(f.group),
        "tuples": len(f),
        "values": f.to_records(nonzero_only=True),
    }


def certificate(kind: str, params: dict, identities=(), cochains=(), extra: dict | None = None) -> dict:
    doc = {
        "kind": kind,
        "params": dict(params),
        "identities": [identity_record(n, w) for n, w in identities],
        "cochains": [cochain_record(n, f) for n, f in cochains],
    }
    if extra:
        doc.update(extra)
    return doc


def dumps(doc: dict) -> str:
    return json.dumps(doc, ensure_ascii=False, indent=1) + "\n"


def write(doc: dict, path) -> None:
    Path(path).write_text(dumps(doc), encoding="utf-8")


def read(path) -> dict:
    return json.loads(Path(path).read_text(encoding="utf-8"))


def find_cochain(doc: dict, names) -> dict:
    """The first cochain record whose name is in ``names``; a bare record passes through."""
    if "values" in doc and "degree" in doc:
        return doc
    for rec in doc.get("cochains", []):
        if rec.get("name") in names:
            return rec
    raise KeyError(f"no cochain named {' or '.join(names)} in document")
