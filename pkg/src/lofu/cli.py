"""Command-line entry point ``lofu``.

Exit codes: 0 success, 2 truncation, 3 invalid input, 4 verification failure.
Every nonzero exit prints a JSON failure record on stderr (and writes it to
``--emit-certificate`` when given).
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict, dataclass

import numpy as np

from . import certificates
from .algebra import AbelianGroup, GroupSpecError, parse_group_spec, render_group
from .compat import diagram_check
from .lf import lf_certificate, lf_class_equal
from .nerve import (
    Cochain,
    EnumerationOverflow,
    NotACocycle,
    class_equal,
    coboundary_witness,
    cohomology,
)
from .paths import PathSpace, PreconditionError, TruncationError
from .regression import regress
from .spaces import BaseSpace, ComplexError, resolve_complex
from .transgression import TransgressionCertificate, VerificationError, transgress

EXIT_OK, EXIT_TRUNCATION, EXIT_INVALID, EXIT_VERIFY = 0, 2, 3, 4


class InvalidInput(ValueError):
    pass


class Failed(RuntimeError):
    """A verification the command promised did not hold."""

    def __init__(self, stage: str, message: str, witness=None):
        super().__init__(message)
        self.stage = stage
        self.witness = witness


@dataclass
class RunConfig:
    command: str
    complex: str
    group: str
    degree: int
    lmax: int
    basepoint: int
    seed: int | None
    cls: str | None = None
    omega: str | None = None
    emit_certificate: str | None = None


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise InvalidInput(message)


def _parser() -> argparse.ArgumentParser:
    p = _Parser(prog="lofu", description="Loop-fusion Čech cohomology on finite models.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(name, help):
        s = sub.add_parser(name, help=help)
        s.add_argument("--complex", required=True, help="fixture name or complex file (json/yaml)")
        s.add_argument("--group", default="Z", help="coefficient group, e.g. Z, Z/2, Z^2+Z/6")
        s.add_argument("--degree", type=int, required=True)
        s.add_argument("--lmax", type=int, default=2, help="maximal path length (unused by cohomology)")
        s.add_argument("--basepoint", type=int, default=0)
        s.add_argument("--seed", type=int, default=None, help="randomize solver variable order")
        s.add_argument("--emit-certificate", metavar="OUT", default=None)
        return s

    common("cohomology", "Čech cohomology of the star cover")
    t = common("transgress", "enhanced transgression of a class on M")
    t.add_argument("--class", dest="cls", default="gen_0", help="gen_i or a cochain file")
    r = common("regress", "regression of a loop-fusion cocycle")
    r.add_argument("--omega", required=True, help="certificate or cochain file holding ω")
    rt = common("roundtrip", "transgress→regress and regress→transgress comparisons")
    rt.add_argument("--class", dest="cls", default=None, help="gen_i or a cochain file (default: all generators)")
    v = common("verify-lf", "check a cochain on Λ is an lf-cocycle")
    v.add_argument("--omega", required=True)
    c = common("compat", "compare ordinary and enhanced transgression")
    c.add_argument("--class", dest="cls", default=None)
    return p


# ---------------------------------------------------------------------------


def _config(ns) -> RunConfig:
    cfg = RunConfig(
        command=ns.command,
        complex=ns.complex,
        group=ns.group,
        degree=ns.degree,
        lmax=ns.lmax,
        basepoint=ns.basepoint,
        seed=ns.seed,
        cls=getattr(ns, "cls", None),
        omega=getattr(ns, "omega", None),
        emit_certificate=ns.emit_certificate,
    )
    if cfg.degree < 0:
        raise InvalidInput("--degree must be non-negative")
    if cfg.command != "cohomology":
        if cfg.lmax < 1:
            raise InvalidInput(f"--lmax must be at least 1 (got {cfg.lmax})")
        if cfg.command in ("transgress", "compat", "roundtrip") and cfg.degree < 1:
            raise InvalidInput("--degree must be at least 1")
    return cfg


class _Run:
    def __init__(self, cfg: RunConfig):
        self.cfg = cfg
        self.group: AbelianGroup = parse_group_spec(cfg.group)
        self.base = BaseSpace(resolve_complex(cfg.complex), cfg.basepoint)
        self._space = None

    @property
    def space(self) -> PathSpace:
        if self._space is None:
            self._space = PathSpace(self.base, self.cfg.lmax)
        return self._space

    def rng(self):
        return None if self.cfg.seed is None else np.random.default_rng(self.cfg.seed)

    def params(self) -> dict:
        d = asdict(self.cfg)
        d.pop("emit_certificate")
        d["group"] = render_group(self.group)
        return d

    def classes(self, spec: str | None) -> list[tuple[str, Cochain]]:
        k = self.cfg.degree
        if spec is not None and not spec.startswith("gen_"):
            rec = certificates.find_cochain(certificates.read(spec), ("α", "alpha"))
            alpha = Cochain.from_records(self.base.star.nerve, k, self.group, rec["values"])
            return [(spec, alpha)]
        gens = cohomology(self.base.star.nerve, self.group, k).generators
        if spec is None:
            if not gens:
                raise InvalidInput(f"H^{k} is trivial; nothing to do")
            return [(f"gen_{i}", g) for i, g in enumerate(gens)]
        try:
            i = int(spec[4:])
            return [(spec, gens[i])]
        except (ValueError, IndexError):
            raise InvalidInput(f"{spec} is not one of gen_0..gen_{len(gens) - 1}") from None

    def omega(self) -> Cochain:
        rec = certificates.find_cochain(certificates.read(self.cfg.omega), ("ω", "omega"))
        if rec["degree"] != self.cfg.degree - 1:
            raise InvalidInput(f"ω has degree {rec['degree']}; expected {self.cfg.degree - 1}")
        return Cochain.from_records(self.space.loops.nerve, rec["degree"], self.group, rec["values"])


def _transgression_doc(run: _Run, name: str, cert: TransgressionCertificate) -> dict:
    return certificates.certificate(
        "transgression",
        run.params(),
        cert.identities(run.space),
        [("α", cert.alpha), ("β", cert.beta), ("ω", cert.omega), ("η", cert.eta), ("g", cert.lf.g)],
        {"class": name, "sign": "𝔗[α] = −[ω]", "domain": cert.lf.sizes},
    )


def _cmd_cohomology(run: _Run, out):
    res = cohomology(run.base.star.nerve, run.group, run.cfg.degree)
    print(str(res.group), file=out)
    return certificates.certificate(
        "cohomology", run.params(), [],
        [(f"gen_{i}", g) for i, g in enumerate(res.generators)],
        {"group": str(res.group)},
    )


def _cmd_transgress(run: _Run, out):
    (name, alpha), = run.classes(run.cfg.cls)
    cert = transgress(run.space, alpha, run.rng())
    print(f"transgressed {name} in degree {alpha.degree} at L_max={run.cfg.lmax}", file=out)
    for n, ok in cert.lf.checks.items():
        print(f"  {n}: {'ok' if ok else 'FAILED'}", file=out)
    print(f"  ω nonzero on {int(cert.omega.values.any(axis=1).sum())} of {len(cert.omega)} tuples", file=out)
    return _transgression_doc(run, name, cert)


def _cmd_regress(run: _Run, out):
    omega = run.omega()
    cert = regress(run.space, omega, rng=run.rng())
    res = cohomology(run.base.star.nerve, run.group, run.cfg.degree)
    print(f"regressed ω to a degree-{cert.k} cocycle on M (H^{cert.k} = {res.group})", file=out)
    print(f"  α is {'a coboundary' if coboundary_witness(cert.alpha) is not None else 'nontrivial'}", file=out)
    return certificates.certificate(
        "regression", run.params(), cert.identities(run.space),
        [("ω", cert.omega), ("g", cert.lf.g), ("κ", cert.kappa), ("τ", cert.tau),
         ("α", cert.alpha), ("μ", cert.mu)],
        {"sign": "R[ω] = −[α]", "reference_tie_break": cert.refs.tie_break},
    )


def _cmd_roundtrip(run: _Run, out):
    space = run.space
    identities, cochains = [], []
    for name, alpha in run.classes(run.cfg.cls):
        t = transgress(space, alpha, run.rng())
        r = regress(space, t.omega, rng=run.rng())
        w = class_equal(alpha, r.alpha)
        identities.append((f"R𝔗[{name}] = [{name}]", None if w is not None else (name,)))
        print(f"{name}: regress(transgress(α)) class-equal to α: {'yes' if w is not None else 'NO'}", file=out)
        t2 = transgress(space, r.alpha, run.rng())
        m = lf_class_equal(space, t.omega, t2.omega, run.rng())
        identities.append((f"𝔗R[ω_{name}] = [ω_{name}]", None if m is not None else (name,)))
        print(f"{name}: transgress(regress(ω)) lf-class-equal to ω: {'yes' if m is not None else 'NO'}", file=out)
        cochains += [(f"α[{name}]", alpha), (f"ω[{name}]", t.omega), (f"R(ω)[{name}]", r.alpha)]
    doc = certificates.certificate("roundtrip", run.params(), identities, cochains)
    _raise_on_failed(identities, "roundtrip")
    return doc


def _cmd_verify_lf(run: _Run, out):
    omega = run.omega()
    cert = lf_certificate(run.space, omega, run.rng())
    for n, ok in cert.checks.items():
        print(f"{n}: {'ok' if ok else 'FAILED'}", file=out)
    identities = [(n, None if ok else (cert.failure.witness or ())) for n, ok in cert.checks.items()]
    doc = certificates.certificate("lf", run.params(), identities, [("ω", omega), ("g", cert.g)],
                                   {"domain": cert.sizes})
    if not cert:
        raise Failed(cert.failure.condition, f"not an lf-cocycle: {cert.failure}", cert.failure.witness)
    return doc


def _cmd_compat(run: _Run, out):
    identities, cochains = [], []
    for name, alpha in run.classes(run.cfg.cls):
        rep = diagram_check(run.space, alpha, run.rng())
        for n, ok in rep.checks.items():
            print(f"{name}: {n}: {'ok' if ok else 'FAILED'}", file=out)
            identities.append((f"{name}: {n}", None if ok else (name,)))
        cochains += [(f"ω[{name}]", rep.omega), (f"T(α)[{name}]", rep.standard)]
    doc = certificates.certificate("compat", run.params(), identities, cochains)
    _raise_on_failed(identities, "compat")
    return doc


def _raise_on_failed(identities, stage):
    bad = [n for n, w in identities if w is not None]
    if bad:
        raise Failed(stage, "failed: " + "; ".join(bad))


COMMANDS = {
    "cohomology": _cmd_cohomology,
    "transgress": _cmd_transgress,
    "regress": _cmd_regress,
    "roundtrip": _cmd_roundtrip,
    "verify-lf": _cmd_verify_lf,
    "compat": _cmd_compat,
}


def _failure(code: int, stage: str, exc: BaseException, witness=None) -> dict:
    return {
        "status": "failure",
        "exit_code": code,
        "stage": stage,
        "error": type(exc).__name__,
        "message": str(exc),
        "witness": None if witness is None else json.loads(json.dumps(witness, default=str)),
    }


def run(argv=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    emit = None
    pending = None
    try:
        ns = _parser().parse_args(argv)
        emit = ns.emit_certificate
        cfg = _config(ns)
        doc = COMMANDS[cfg.command](_Run(cfg), out)
        if emit:
            certificates.write(doc, emit)
        return EXIT_OK
    except TruncationError as exc:
        pending = _failure(EXIT_TRUNCATION, exc.stage, exc, exc.witness)
    except EnumerationOverflow as exc:
        pending = _failure(EXIT_TRUNCATION, "nerve", exc)
    except Failed as exc:
        pending = _failure(EXIT_VERIFY, exc.stage, exc, exc.witness)
    except VerificationError as exc:
        pending = _failure(EXIT_VERIFY, exc.identity, exc, exc.witness)
    except (InvalidInput, ComplexError, GroupSpecError, NotACocycle, PreconditionError,
            KeyError, ValueError, OSError) as exc:
        pending = _failure(EXIT_INVALID, "input", exc)
    print(json.dumps(pending, ensure_ascii=False), file=err)
    if emit:
        try:
            certificates.write(pending, emit)
        except OSError:
            pass
    return pending["exit_code"]


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
