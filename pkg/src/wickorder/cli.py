"""Command line interface: ``wickorder <command> ...``.

Exit codes: 0 success, 1 usage or input error, 2 parse error, 3 failed
exact verification, 4 numeric check outside tolerance.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path
from typing import Sequence

from .algebra import LinearCombination, OperatorPolynomial, generator_name
from .errors import ParseError, WickError
from .expr import evaluate, evaluate_text, parse
from .scalar import Scalar, format_rational, rational

EXIT_OK, EXIT_USAGE, EXIT_PARSE, EXIT_VERIFY, EXIT_NUMERIC = 0, 1, 2, 3, 4

DEFAULTS = {"fock": 64, "steps": 1000, "tolerance": 1e-6}

_ORDER_NAMES = {
    "N": "normal", "normal": "normal",
    "A": "antinormal", "antinormal": "antinormal",
    "QP": "qp", "qp": "qp",
    "PQ": "pq", "pq": "pq",
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


# -- output helpers --------------------------------------------------------------

def scalar_entries(c: Scalar) -> list[dict]:
    out = []
    for mono, h, g in c.terms():
        out.append({
            "re": format_rational(g.re),
            "im": format_rational(g.im),
            "params": {name: e for name, e in mono},
            "sqrt2": h,
        })
    return out


def poly_entries(p: OperatorPolynomial) -> list[dict]:
    indexed = p.n_modes > 1
    out = []
    for word, coeff in p.sorted_items():
        for entry in scalar_entries(coeff):
            out.append({"word": [generator_name(g, indexed) for g in word], **entry})
    return out


def _emit(args, text: str, payload: dict) -> None:
    if args.json:
        print(json.dumps(payload, indent=2, sort_keys=True))
    else:
        print(text)


def load_config(path: str | None) -> dict:
    """``key = value`` lines for ``fock``, ``steps`` and ``tolerance``."""
    cfg = dict(DEFAULTS)
    cfg["explicit"] = set()
    if not path:
        return cfg
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in DEFAULTS:
            raise UsageError(f"{path}:{lineno}: unknown key {key!r}")
        cfg[key] = type(DEFAULTS[key])(value) if key != "tolerance" else float(value)
        cfg["explicit"].add(key)
    return cfg


def _setting(args, key):
    value = getattr(args, key, None)
    return value if value is not None else args.config_values[key]


def _fock_dim(args) -> int | None:
    """``--fock`` if given, else a dimension set in the config file, else no numeric check."""
    if args.fock is not None:
        return args.fock
    return args.config_values["fock"] if "fock" in args.config_values["explicit"] else None


def _linear(text: str, n_modes: int) -> LinearCombination:
    poly = evaluate(parse(text, n_modes), n_modes)
    return LinearCombination.from_poly(poly, n_modes)


def _ordering(name: str, x: LinearCombination, n_modes: int):
    from .gwt import Ordering
    from .orderings import builtin_ordering

    if name not in _ORDER_NAMES:
        raise UsageError(f"unknown ordering {name!r}; expected one of N, A, QP, PQ")
    return Ordering.of(builtin_ordering(_ORDER_NAMES[name], n_modes), x)


def parse_chi(text: str):
    """``t``, ``t^k``, ``jump@a`` or pieces ``a:b:poly; ...`` with polynomials in ``t``."""
    from .sordering import ChiPath

    text = text.strip()
    if text.startswith("jump@"):
        return ChiPath.jump_at(rational(text[5:]))
    if ":" not in text:
        return ChiPath((0, 1), [_poly_in_t(text)])
    breaks, pieces = [], []
    for chunk in text.split(";"):
        chunk = chunk.strip()
        if not chunk:
            continue
        parts = chunk.split(":", 2)
        if len(parts) != 3:
            raise UsageError(f"piece {chunk!r} is not 'start:end:polynomial'")
        a, b = Fraction(parts[0].strip()), Fraction(parts[1].strip())
        if breaks and breaks[-1] != a:
            raise UsageError("pieces must be contiguous")
        if not breaks:
            breaks.append(a)
        breaks.append(b)
        pieces.append(_poly_in_t(parts[2]))
    return ChiPath(breaks, pieces)


def _poly_in_t(text: str) -> tuple:
    value = evaluate(parse(text))
    if not value.is_scalar():
        raise UsageError(f"{text!r} is not a polynomial in t")
    coeffs: dict[int, Fraction] = {}
    for mono, h, g in value.scalar_part().terms():
        names = dict(mono)
        if h or g.im or set(names) - {"t"}:
            raise UsageError(f"{text!r} must be a rational polynomial in t")
        coeffs[names.get("t", 0)] = Fraction(int(g.re.numerator), int(g.re.denominator))
    return tuple(coeffs.get(k, Fraction(0)) for k in range(max(coeffs, default=0) + 1))


# -- commands --------------------------------------------------------------------

def cmd_order(args) -> int:
    value = evaluate_text(args.expr, args.modes, args.basis)
    _emit(args, str(value), {"normal_form": poly_entries(value)})
    return EXIT_OK


def cmd_contract(args) -> int:
    from .gwt import general_contraction

    x = _linear(args.x, args.modes)
    c = general_contraction(_ordering(args.source, x, args.modes), _ordering(args.target, x, args.modes))
    _emit(args, str(c), {"contraction": scalar_entries(c)})
    return EXIT_OK


def cmd_gwt_verify(args) -> int:
    from .gwt import gwt_verify

    x = _linear(args.x, args.modes)
    report = gwt_verify(_ordering(args.source, x, args.modes), _ordering(args.target, x, args.modes),
                        args.degree)
    payload = {
        "contraction": scalar_entries(report.contraction),
        "report": {"passed": report.passed, "max_degree": report.max_degree,
                   "first_failure": report.first_failure,
                   "degrees": [{"degree": d, "passed": ok} for d, ok in report.degrees]},
    }
    _emit(args, ("pass" if report.passed else "FAIL") + f"\nC = {report.contraction}"
          + ("" if report.passed else f"\nfirst failing degree: {report.first_failure}"), payload)
    return EXIT_OK if report.passed else EXIT_VERIFY


def cmd_sweights(args) -> int:
    from .sordering import pattern_word, verify_scheme

    chi = parse_chi(args.chi)
    report = verify_scheme(chi, args.n, args.m)
    lines = [f"s = {report.s}"]
    for pattern, w in report.weights.weights.items():
        lines.append(f"{'*'.join(pattern_word(pattern)) or '1'}: {w}")
    lines.append(f"value = {report.mixture}")
    lines.append("verified" if report.passed else f"MISMATCH: expected {report.expected}")
    payload = {
        "s": str(report.s),
        "weights": {p: str(w) for p, w in report.weights.weights.items()},
        "normal_form": poly_entries(report.mixture),
        "report": {"passed": report.passed},
    }
    _emit(args, "\n".join(lines), payload)
    return EXIT_OK if report.passed else EXIT_VERIFY


def cmd_svalue(args) -> int:
    from .sordering import s_ordered_value

    value = s_ordered_value(args.n, args.m, Scalar(rational(args.s)))
    _emit(args, str(value), {"normal_form": poly_entries(value)})
    return EXIT_OK


def _complex_text(z: complex) -> str:
    return f"{z.real:.12g}{z.imag:+.12g}i"


def cmd_evolve(args) -> int:
    from .applications import (
        DriveSpec,
        cavity_trotter,
        cavity_unitary,
        driven_cavity,
        forced_particle,
        particle_trotter,
        particle_unitary,
        state_overlap,
        unitarity_error,
    )
    from .fock import FockConfig, compare_block

    t = Fraction(args.t) if args.t else None
    drive = DriveSpec.parse(Path(args.drive).read_text(), t)
    t = drive.horizon if t is None else t
    payload: dict = {"system": args.system}
    lines = []
    if args.system == "particle":
        mass = Fraction(args.m) if args.m else Fraction(1)
        res = forced_particle(drive, mass, t)
        entries = {"dp": res.momentum, "dq": res.coordinate, "contraction": res.contraction}
    else:
        omega = Fraction(args.omega) if args.omega else Fraction(0)
        res = driven_cavity(drive, omega, t)
        entries = {"dc": res.shift, "dc_conj": res.shift_conj, "contraction": res.contraction}
    for key, v in entries.items():
        if isinstance(v, Scalar):
            lines.append(f"{key} = {v}")
            payload[key] = scalar_entries(v)
        else:
            lines.append(f"{key} = {_complex_text(v)}")
            payload[key] = {"re": repr(v.real), "im": repr(v.imag)}
    status = EXIT_OK
    dim = _fock_dim(args)
    if dim:
        cfg = FockConfig(dim)
        steps = _setting(args, "steps")
        tol = _setting(args, "tolerance")
        if args.system == "particle":
            closed = particle_unitary(res, cfg)
            trotter = particle_trotter(drive, cfg, mass, steps, t)
            err = abs(1 - state_overlap(closed, trotter))
            label = "vacuum overlap error"
        else:
            closed = cavity_unitary(res, cfg)
            trotter = cavity_trotter(drive, cfg, omega, steps, t)
            err = compare_block(closed, trotter, cfg.dim // 2, cfg)
            label = "safe-block operator error"
        uerr = unitarity_error(closed, cfg.dim // 2, cfg)
        lines.append(f"{label} = {err:.3e} (steps {steps}, N {cfg.dim}, tolerance {tol:g})")
        lines.append(f"unitarity error = {uerr:.3e}")
        payload["report"] = {"error": err, "unitarity_error": uerr, "tolerance": tol,
                             "passed": bool(err <= tol)}
        if err > tol:
            status = EXIT_NUMERIC
    _emit(args, "\n".join(lines), payload)
    return status


def cmd_squeeze(args) -> int:
    from .applications import normal_ordered_gaussian_matrix, squeeze_generator_matrix, squeezing_normal_form
    from .fock import FockConfig, compare_block

    g = squeezing_normal_form(Fraction(args.mu))
    lines = [f"prefactor^2 = {g.prefactor_squared}", f"alpha (cd^2) = {g.alpha}",
             f"beta (cd*c) = {g.beta}", f"gamma (c^2) = {g.gamma}",
             f"exponent in q, p symbols = {g.qp_symbol_exponent()}"]
    payload: dict = {k: scalar_entries(getattr(g, k)) for k in ("prefactor_squared", "alpha", "beta", "gamma")}
    status = EXIT_OK
    dim = _fock_dim(args)
    if dim:
        cfg = FockConfig(dim)
        tol = _setting(args, "tolerance")
        err = compare_block(normal_ordered_gaussian_matrix(g, cfg),
                            squeeze_generator_matrix(float(Fraction(args.mu)), cfg), cfg.dim // 2, cfg)
        lines.append(f"top-block error vs exp(i ln(mu) (qp+pq)/2) = {err:.3e} (tolerance {tol:g})")
        payload["report"] = {"error": err, "tolerance": tol, "passed": bool(err <= tol)}
        if err > tol:
            status = EXIT_NUMERIC
    _emit(args, "\n".join(lines), payload)
    return status


# -- argument parsing ------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--json", action="store_true", help="machine-readable output")
    common.add_argument("--modes", type=int, default=1, help="number of modes (default 1)")
    common.add_argument("--config", help="key = value file setting fock, steps, tolerance")

    parser = _Parser(prog="wickorder", description="Exact operator orderings and contractions.")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser, required=True)

    p = sub.add_parser("order", parents=[common], help="evaluate an expression and print its normal form")
    p.add_argument("expr")
    p.add_argument("--basis", choices=("ladder", "qp"), help="normal-form basis (default: automatic)")
    p.set_defaults(func=cmd_order)

    for name, func, helptext in (("contract", cmd_contract, "print the contraction between two orderings"),
                                 ("gwt-verify", cmd_gwt_verify, "verify the Wick relation order by order")):
        p = sub.add_parser(name, parents=[common], help=helptext)
        p.add_argument("--from", dest="source", required=True, help="N, A, QP or PQ")
        p.add_argument("--to", dest="target", required=True, help="N, A, QP or PQ")
        p.add_argument("--x", required=True, help="linear combination of generators")
        if name == "gwt-verify":
            p.add_argument("--degree", type=int, default=6)
        p.set_defaults(func=func)

    p = sub.add_parser("sweights", parents=[common], help="interleaving weights of a path ordering")
    p.add_argument("--chi", required=True, help="t, t^k, jump@a or a:b:poly; ...")
    p.add_argument("--n", type=int, required=True, help="power of c")
    p.add_argument("--m", type=int, required=True, help="power of cd")
    p.set_defaults(func=cmd_sweights)

    p = sub.add_parser("svalue", parents=[common], help="s-ordered c^n cd^m in normal form")
    p.add_argument("--s", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.set_defaults(func=cmd_svalue)

    p = sub.add_parser("evolve", parents=[common], help="closed-form driven evolution")
    p.add_argument("system", choices=("particle", "cavity"))
    p.add_argument("--drive", required=True, help="file of '<t_start> <t_end> <value>' lines")
    p.add_argument("--m", help="particle mass (default 1)")
    p.add_argument("--omega", help="cavity frequency (default 0)")
    p.add_argument("--t", help="final time (default: drive horizon)")
    p.add_argument("--fock", type=int, help="run the Trotter cross-check at this dimension")
    p.add_argument("--steps", type=int)
    p.add_argument("--tolerance", type=float)
    p.set_defaults(func=cmd_evolve)

    p = sub.add_parser("squeeze", parents=[common], help="normal-ordered squeezer")
    p.add_argument("--mu", required=True)
    p.add_argument("--fock", type=int, help="compare with the dilation generator at this dimension")
    p.add_argument("--tolerance", type=float)
    p.set_defaults(func=cmd_squeeze)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.config_values = load_config(args.config)
        if args.modes < 1:
            raise UsageError("--modes must be at least 1")
        return args.func(args)
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (UsageError, WickError, ValueError, OSError, ZeroDivisionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def run() -> None:
    sys.exit(main())


if __name__ == "__main__":
    run()
