"""Command line front end: build a catalog entry, run suites, write a JSON report.

Exit status: 0 when every expectation that applies to the run matches the
measured value, 1 on a mismatch, 2 on an invalid configuration.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from typing import Optional

from .clifford import Signature, build_rep
from .exactla import Mat, format_scalar, rank
from .forms import MixedForm, hodge_star
from .holonomy import (HolonomyAlgebra, catalog, eplus_annihilation_check, load_custom,
                       spinor_invariants)
from .spinors import real_structure, squaring
from .superalgebra import (Superalgebra, build, classify_orbit_type,
                           holonomy_obstruction_predicate, real_span)

SUITES = ("algebra", "jacobi", "fefferman", "flat")
DEFAULT_SUITES = ("algebra", "jacobi", "fefferman")
DEFAULT_MAX_TRACTOR_DIM = 12
PROFILES = {"lorentzian": "lorentzian2form", "general": "general"}


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    sig: tuple = (1, 3)
    holonomy: str = "trivial"
    params: dict = field(default_factory=dict)
    profile: Optional[str] = None
    field: Optional[str] = None
    suites: tuple = DEFAULT_SUITES
    generators: Optional[str] = None
    out: Optional[str] = None
    seed: int = 0
    flat_sample: Optional[int] = None

    def __post_init__(self):
        p, q = self.sig
        if p < 0 or q < 0 or p + q < 1:
            raise ConfigError(f"invalid signature {p},{q}")
        cap = max_tractor_dim()
        if p + q + 2 > cap:
            raise ConfigError(f"signature {p},{q} exceeds the dimension cap "
                              f"(tractor dimension {p + q + 2} > {cap}; set TRACTOR_MAX_DIM to raise it)")
        if self.profile is not None and self.profile not in PROFILES:
            raise ConfigError(f"unknown profile {self.profile!r}")
        if self.field is not None and self.field not in ("real", "complex"):
            raise ConfigError(f"unknown field {self.field!r}")
        bad = [s for s in self.suites if s not in SUITES]
        if bad:
            raise ConfigError(f"unknown suite(s) {bad}")


def max_tractor_dim() -> int:
    raw = os.environ.get("TRACTOR_MAX_DIM")
    if not raw:
        return DEFAULT_MAX_TRACTOR_DIM
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"TRACTOR_MAX_DIM must be an integer, got {raw!r}") from None


def parse_holonomy(text: str) -> tuple:
    """'name' or 'name:key=value,key=value' -> (name, params)."""
    name, _, rest = text.partition(":")
    params = {}
    for item in filter(None, rest.split(",")):
        key, eq, value = item.partition("=")
        if not eq:
            raise ConfigError(f"holonomy parameter {item!r} is not key=value")
        value = value.strip()
        params[key.strip()] = int(value) if value.lstrip("-").isdigit() else value
    return name.strip(), params


def load_expectations() -> dict:
    text = resources.files("tractorsuper").joinpath("data/expectations.json").read_text()
    return json.loads(text)


# ------------------------------------------------------------ helpers


def _form_json(a: MixedForm) -> dict:
    out = {}
    for key, c in sorted(a.items(), key=lambda kv: (len(kv[0]), kv[0])):
        label = "^".join(f"e{i}" for i in key) if key else "1"
        out[label] = format_scalar(c)
    return out


def _spinor_json(s: Mat) -> list:
    return [format_scalar(z) for z in s.entries]


def _grade_dims(alg: Superalgebra) -> dict:
    out = {}
    if not alg.g0_basis or not isinstance(alg.g0_basis[0], MixedForm):
        return out
    codec = alg.codec
    grades = sorted({g for a in alg.g0_basis for g in a.grades()})
    for k in grades:
        parts = [codec.encode(a.part(k)) for a in alg.g0_basis]
        out[str(k)] = len(real_span([v for v in parts if not v.is_zero()]))
    return out


def _bracket_table(alg: Superalgebra) -> list:
    C = alg.structure
    rows = []
    for i in range(alg.dim):
        for j in range(i, alg.dim):
            for k in range(alg.dim):
                if C[i][j][k]:
                    rows.append([i, j, k, format_scalar(C[i][j][k])])
    return rows


def _complex_dim(vectors) -> int:
    return rank(Mat.hstack(list(vectors))) if vectors else 0


# ------------------------------------------------------------ holonomy set-up


def _resolve(config: RunConfig) -> tuple:
    """(holonomy, base signature, profile kind, field, notes)."""
    notes = {}
    p, q = config.sig
    base = Signature(p, q)
    tsig = base.tractor()
    name, params = config.holonomy, dict(config.params)
    if name == "custom" or config.generators:
        path = config.generators or params.get("file")
        if not path:
            raise ConfigError("custom holonomy needs --generators FILE")
        h = load_custom(path)
        if h.tractor_sig != tsig:
            raise ConfigError(f"generator file is for tractor signature "
                              f"({h.tractor_sig.p},{h.tractor_sig.q}), not ({tsig.p},{tsig.q})")
    elif name == "su":
        if p != 1 or base.n % 2:
            raise ConfigError("su holonomy (and the fefferman suite) needs base signature 1,n-1 with n even")
        h = catalog("su", m=base.n // 2)
    elif name == "g2_split":
        if (p, q) != (3, 2):
            raise ConfigError("g2_split lives in tractor signature (4,3): use --sig 3,2")
        h = catalog("g2_split", seed=params.get("seed", config.seed))
    elif name == "plane_wave":
        if p != 1 or q < 2:
            raise ConfigError("plane_wave needs base signature 1,q with q >= 2")
        h, notes["plane_wave"] = _plane_wave(q - 1, params.get("ordering"))
    elif name == "ricci_flat":
        h = catalog("ricci_flat", tsig, h0=params.get("h0", "trivial"), k=params.get("k", 0))
    elif name == "trivial":
        h = catalog("trivial", tsig)
    else:
        raise ConfigError(f"unknown holonomy {name!r}")

    field_ = config.field or ("real" if name == "g2_split" else "complex")
    if config.profile is not None:
        profile = PROFILES[config.profile]
    else:
        profile = "lorentzian2form" if 2 in (h.tractor_sig.p, h.tractor_sig.q) else "general"
    if profile == "lorentzian2form" and 2 not in (h.tractor_sig.p, h.tractor_sig.q):
        raise ConfigError(f"the lorentzian profile needs base signature 1,n (tractor 2,n+2); "
                          f"got {p},{q}")
    if field_ == "real" and real_structure(build_rep(h.tractor_sig)) is None:
        flipped = h.tractor_sig.flipped()
        if name == "trivial" and real_structure(build_rep(flipped)) is not None:
            notes["signature_swap"] = {"from": [h.tractor_sig.p, h.tractor_sig.q],
                                       "to": [flipped.p, flipped.q],
                                       "reason": "no real structure on spinors of the original tractor signature"}
            h = catalog("trivial", flipped)
        else:
            raise ConfigError(f"no real structure on spinors of tractor signature "
                              f"({h.tractor_sig.p},{h.tractor_sig.q})")
    return h, base, profile, field_, notes


def _plane_wave(n: int, ordering) -> tuple:
    orders = [int(ordering)] if ordering is not None else [0, 1]
    tried = []
    h = None
    for o in orders:
        h = catalog("plane_wave", n=n, ordering=o)
        frac = Fraction(len(spinor_invariants(h)), build_rep(h.tractor_sig).dim)
        tried.append({"ordering": o, "invariant_fraction": format_scalar(frac)})
        if frac == Fraction(1, 4):
            break
    return h, {"ordering": tried[-1]["ordering"], "tried": tried}


# ------------------------------------------------------------ suites


def _algebra_section(alg: Superalgebra, h: HolonomyAlgebra) -> dict:
    inv = spinor_invariants(h)
    return {
        "g0": {
            "dim": alg.d0,
            "dims_per_grade": _grade_dims(alg),
            "basis": [_form_json(a) if isinstance(a, MixedForm) else str(a) for a in alg.g0_basis],
            "abelian": alg.is_abelian_even(),
        },
        "g1": {
            "real_dim": alg.d1,
            "complex_invariant_dim": _complex_dim(inv),
            "basis": [_spinor_json(s) for s in alg.g1_basis],
        },
        "profile": {"kind": alg.profile.kind, "odd_odd_grades": list(alg.profile.odd_odd_grades)},
        "brackets": {
            "convention": "[b_i, b_j] = sum_k c_ijk b_k, listed for i <= j; even basis first",
            "nonzero": _bracket_table(alg),
        },
    }


def _orbit_section(h: HolonomyAlgebra) -> dict:
    if h.tractor_sig.p != 2:
        return {"available": False, "reason": "orbit types are defined for tractor signature (2,n)"}
    rep = build_rep(h.tractor_sig)
    kinds = []
    for s in spinor_invariants(h):
        t = classify_orbit_type(rep, s)
        kinds.append({"kind": t.kind, "kernel_dim": t.kernel_dim,
                      "euclidean_complement_dim": t.euclidean_complement_dim})
    return {"available": True, "basis_spinors": kinds,
            "no_kaehler_type_spinor": holonomy_obstruction_predicate(h)}


def _fefferman_section(h: HolonomyAlgebra) -> dict:
    from .fefferman import build_fefferman, check_invariants, extended_brackets, plain_brackets
    fd = build_fefferman(h)
    ext = extended_brackets(fd)
    plain = plain_brackets(fd)
    literal = extended_brackets(fd, constant=Fraction(fd.n, 2) - 1)
    n = fd.n
    return {
        "n": n,
        "eigenvalue": format_scalar(fd.eigenvalue),
        "kaehler_form_norm": format_scalar(Fraction(n, 2) + 1),
        "invariants": dict(sorted(check_invariants(fd).items())),
        "g0_dim": plain.d0,
        "g0_dim_bound": n // 2 + 1,
        "g0_abelian": plain.is_abelian_even(),
        "extended": ext.jacobi_check().to_json(),
        "plain": plain.jacobi_check().to_json(),
        "extended_with_constant_n_over_2_minus_1": literal.jacobi_check().to_json(),
    }


def _flat_section(base: Signature, seed: int, sample: Optional[int]) -> dict:
    from .flatmodel import correspondence_suite, generator_span_check, measure_tuffi_constants
    if sample is None and base.n > 4:
        sample = 12
    suite = correspondence_suite(base, sample=sample, seed=seed)
    tuffi = {}
    for k in (1, 2):
        if k <= base.n:
            try:
                c1, c2 = measure_tuffi_constants(base, k)
                tuffi[str(k)] = {"c1": None if c1 is None else format_scalar(c1),
                                 "c2": None if c2 is None else format_scalar(c2)}
            except ArithmeticError as exc:
                tuffi[str(k)] = {"error": str(exc)}
    return {
        "sample": sample,
        "seed": seed,
        "correspondence": suite.to_json(),
        "generator_span": generator_span_check(base),
        "tuffi": tuffi,
    }


def _hodge_section(h: HolonomyAlgebra, alg: Optional[Superalgebra]) -> dict:
    out = {"orientation": "e0^e1^...^e(N-1) in index order"}
    if alg is not None and alg.g0_basis and isinstance(alg.g0_basis[0], MixedForm):
        signs = {}
        for a in alg.g0_basis:
            for k in a.grades():
                part = a.part(k)
                twice = hodge_star(hodge_star(part))
                signs[str(k)] = format_scalar(twice.coeff(next(iter(part.components))) /
                                              part.coeff(next(iter(part.components))))
        out["star_star_sign_per_grade"] = dict(sorted(signs.items()))
    three = h.info.get("three_form") if h.info else None
    if three is not None:
        rep = build_rep(h.tractor_sig)
        four = squaring(rep, h.info["spinor"], h.info["spinor"], 4)
        star = hodge_star(three)
        key = next(iter(four.components))
        ratio = star.coeff(key) / four.coeff(key)
        out["star_three_over_four"] = format_scalar(ratio) if star == four.scale(ratio) else None
    return out


def _plane_wave_section(h: HolonomyAlgebra, notes: dict) -> dict:
    inv = spinor_invariants(h)
    dim = build_rep(h.tractor_sig).dim
    return {
        "ordering": notes.get("ordering"),
        "tried": notes.get("tried"),
        "invariant_dim": len(inv),
        "spinor_dim": dim,
        "invariant_fraction": format_scalar(Fraction(len(inv), dim)),
        "eplus_annihilates": eplus_annihilation_check(h.tractor_sig, inv),
    }


# ------------------------------------------------------------ expectations


def _measured_flags(report: dict) -> dict:
    m = {}
    jac = report.get("jacobi")
    if jac:
        for k, v in jac["flags"].items():
            m[f"jacobi.{k}"] = v
    alg = report.get("algebra")
    if alg:
        m["g0.abelian"] = alg["g0"]["abelian"]
        m["g0.dim"] = alg["g0"]["dim"]
        m["g1.complex_dim"] = alg["g1"]["complex_invariant_dim"]
        m["g1.real_dim"] = alg["g1"]["real_dim"]
    orb = report.get("orbit_types")
    if orb and orb.get("available"):
        m["no_kaehler_type_spinor"] = orb["no_kaehler_type_spinor"]
    fef = report.get("fefferman")
    if fef:
        for part in ("extended", "plain"):
            for k, v in fef[part]["flags"].items():
                m[f"fefferman.{part}.{k}"] = v
        m["fefferman.g0_abelian"] = fef["g0_abelian"]
        m["fefferman.g0_dim_within_bound"] = fef["g0_dim"] <= fef["g0_dim_bound"]
    pw = report.get("plane_wave")
    if pw:
        m["plane_wave.invariant_fraction"] = pw["invariant_fraction"]
        m["plane_wave.eplus_annihilates"] = pw["eplus_annihilates"]
    flat = report.get("flat")
    if flat:
        m["flat.correspondence"] = flat["correspondence"]["pass"]
    return m


def _rule_applies(when: dict, ctx: dict, measured: dict) -> bool:
    for key, want in when.items():
        if key == "min_base_dim":
            if ctx["base_dim"] < want:
                return False
        elif key == "max_base_dim":
            if ctx["base_dim"] > want:
                return False
        elif key in ctx:
            if ctx[key] != want:
                return False
        elif key.startswith("measured:"):
            if measured.get(key[len("measured:"):]) != want:
                return False
        else:
            raise ValueError(f"unknown expectation condition {key!r}")
    return True


def evaluate_expectations(report: dict, table: dict) -> list:
    ctx = report["context"]
    measured = _measured_flags(report)
    checks = []
    for rule in table["rules"]:
        if not _rule_applies(rule.get("when", {}), ctx, measured):
            continue
        for key, want in sorted(rule["expect"].items()):
            if key not in measured:
                continue
            checks.append({"rule": rule["id"], "flag": key, "expected": want,
                           "measured": measured[key], "match": measured[key] == want})
    return checks


# ------------------------------------------------------------ driver


def run(config: RunConfig) -> tuple:
    """(exit status, report dict)."""
    h, base, profile, field_, notes = _resolve(config)
    suites = set(config.suites)
    report: dict = {
        "context": {
            "holonomy": config.holonomy if not config.generators else "custom",
            "base_signature": [base.p, base.q],
            "base_dim": base.n,
            "tractor_signature": [h.tractor_sig.p, h.tractor_sig.q],
            "profile": "lorentzian" if profile == "lorentzian2form" else "general",
            "field": field_,
            "holonomy_dim": h.dim,
            "seed": config.seed,
            "suites": sorted(suites),
        },
        "conventions": {
            "clifford": "e_i e_j + e_j e_i = -2 eps_i delta_ij, first p indices timelike",
            "tractor_positions": "0 = extra timelike, 1..n = base, n+1 = extra spacelike",
            "null_pair": "f+ = e_last + e_0, f- = e_last - e_0",
            "scalars": "a/b and a/b+c/d*i in lowest terms",
        },
    }
    if "signature_swap" in notes:
        report["context"]["signature_swap"] = notes["signature_swap"]
    alg = None
    if suites & {"algebra", "jacobi"}:
        alg = build(h, profile, field_)
        if "algebra" in suites:
            report["algebra"] = _algebra_section(alg, h)
            report["orbit_types"] = _orbit_section(h)
        if "jacobi" in suites:
            report["jacobi"] = alg.jacobi_check().to_json()
    if "fefferman" in suites:
        if config.holonomy == "su":
            report["fefferman"] = _fefferman_section(h)
        elif tuple(config.suites) != DEFAULT_SUITES:
            raise ConfigError("the fefferman suite needs --holonomy su with base signature 1,n-1, n even")
    if "flat" in suites:
        if config.holonomy != "trivial" or "signature_swap" in notes:
            raise ConfigError("the flat suite runs on the flat model: use --holonomy trivial (complex field)")
        report["flat"] = _flat_section(base, config.seed, config.flat_sample)
    if config.holonomy == "plane_wave":
        report["plane_wave"] = _plane_wave_section(h, notes["plane_wave"])
    report["measured_constants"] = {"hodge": _hodge_section(h, alg)}
    if "flat" in report:
        report["measured_constants"]["tuffi"] = report["flat"]["tuffi"]
    if "plane_wave" in report:
        report["measured_constants"]["plane_wave_ordering"] = report["plane_wave"]["ordering"]
    table = load_expectations()
    checks = evaluate_expectations(report, table)
    report["expectations"] = {"table_version": table["version"], "checks": checks,
                              "all_match": all(c["match"] for c in checks)}
    return (0 if report["expectations"]["all_match"] else 1), report


def dumps(report: dict) -> str:
    return json.dumps(report, sort_keys=True, indent=2) + "\n"


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="tractorsuper", description=__doc__.splitlines()[0])
    ap.add_argument("--sig", default="1,3", help="base signature P,Q")
    ap.add_argument("--holonomy", default="trivial",
                    help="trivial | su | g2_split[:seed=N] | plane_wave[:ordering=0|1] | "
                         "ricci_flat[:h0=NAME,k=K] | custom")
    ap.add_argument("--profile", choices=sorted(PROFILES))
    ap.add_argument("--field", choices=["real", "complex"])
    ap.add_argument("--suite", action="append", choices=list(SUITES) + ["all"],
                    help="repeatable; default algebra+jacobi(+fefferman for su)")
    ap.add_argument("--generators", help="JSON file with custom holonomy generators")
    ap.add_argument("--out", help="write the report here instead of stdout")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--flat-sample", type=int, help="seeded pairs per identity in the flat suite")
    return ap


def config_from_args(args: argparse.Namespace) -> RunConfig:
    try:
        p, q = (int(x) for x in args.sig.split(","))
    except ValueError:
        raise ConfigError(f"--sig expects P,Q, got {args.sig!r}") from None
    name, params = parse_holonomy(args.holonomy)
    if args.suite is None:
        suites = DEFAULT_SUITES
    elif "all" in args.suite:
        suites = SUITES
    else:
        suites = tuple(dict.fromkeys(args.suite))
    if name != "su" and "all" in (args.suite or []):
        suites = tuple(s for s in suites if s != "fefferman")
    return RunConfig((p, q), name, params, args.profile, args.field, suites,
                     args.generators, args.out, args.seed, args.flat_sample)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = config_from_args(args)
        status, report = run(config)
    except (ConfigError, ValueError) as exc:
        print(f"tractorsuper: error: {exc}", file=sys.stderr)
        return 2
    text = dumps(report)
    if config.out:
        with open(config.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if status:
        bad = [c for c in report["expectations"]["checks"] if not c["match"]]
        for c in bad:
            print(f"tractorsuper: expectation {c['rule']}:{c['flag']} expected {c['expected']}, "
                  f"measured {c['measured']}", file=sys.stderr)
    return status


if __name__ == "__main__":
    sys.exit(main())
