"""Experiment runner: solve / verify / spectrum / growth.

Configs are JSON documents; complex scalars and vectors are written as
[re, im] pairs.  Outputs land in the --out directory: a CSV table, a JSON
summary, and a rendered PNG figure per subcommand.  Serial runs are
byte-deterministic; --parallel fans the t-grid out over threads and keeps
the row order fixed, so only last-ulp quadrature differences can appear.

Exit codes: 0 success, 2 configuration problems (with field diagnostics),
3 numerical failures (module errors verbatim).
"""

from __future__ import annotations

import argparse
import concurrent.futures
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import figures
from .abel import group_by_gaps, make_power_grouping, split_order_reduction
from .contour import QuadratureSettings, pole_residue
from .errors import AbelsumError, ConfigError
from .evolve import (
    CauchyProblem,
    build_artificial_normal,
    build_difference_operator,
    build_sturm_liouville,
    residual as problem_residual,
    solve_cauchy,
)
from .funcspec import FunctionSpec, monomial
from .growth import (
    ZeroSequence,
    beta_function,
    convergence_exponent,
    counting_function,
    det_resolvent_bound_check,
    example41_sequence,
)
from .linops import (
    JordanSpec,
    build_jordan_operator,
    decaying_element,
    random_jordan_spec,
    sector_gauge,
)
from .abel import projector_apply


def _fmt(x: float) -> str:
    return f"{x:.16e}"


def _write_csv(path: Path, header, rows) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(row))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def _write_json(path: Path, doc) -> None:
    path.write_text(json.dumps(doc, sort_keys=True, indent=1) + "\n", encoding="utf-8")


# ---------------------------------------------------------------------------
# config access with field-path diagnostics


def _get(doc, path, expected=None, default=None, required=False):
    node = doc
    walked = []
    for part in path.split("."):
        walked.append(part)
        if not isinstance(node, dict) or part not in node:
            if required:
                raise ConfigError(
                    f"missing required field '{'.'.join(walked)}'", field=path
                )
            return default
        node = node[part]
    if expected is not None and not isinstance(node, expected):
        names = expected.__name__ if isinstance(expected, type) else \
            "/".join(t.__name__ for t in expected)
        raise ConfigError(
            f"field '{path}' must be {names}, got {type(node).__name__}", field=path
        )
    return node


def _complex_pair(value, path):
    if isinstance(value, (int, float)):
        return complex(value)
    if (isinstance(value, (list, tuple)) and len(value) == 2
            and all(isinstance(v, (int, float)) for v in value)):
        return complex(value[0], value[1])
    raise ConfigError(f"field '{path}' must be a number or [re, im] pair", field=path)


def _complex_vector(values, path):
    if not isinstance(values, list):
        raise ConfigError(f"field '{path}' must be an array", field=path)
    return np.array([_complex_pair(v, f"{path}[{i}]") for i, v in enumerate(values)])


def _load_config(path: str) -> dict:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(
            f"config is not valid JSON at line {exc.lineno}, column {exc.colno}: "
            f"{exc.msg}"
        ) from exc
    if not isinstance(doc, dict):
        raise ConfigError("config root must be an object")
    return doc


def _build_phi(doc):
    node = _get(doc, "phi", dict, default={"kind": "monomial", "degree": 1})
    kind = _get(node, "kind", str, required=True) if "kind" in node else "monomial"
    try:
        if kind == "monomial":
            return monomial(int(node.get("degree", 1)))
        return FunctionSpec.from_config(node)
    except (AbelsumError, KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad symbol description under 'phi': {exc}", field="phi") from exc


def _build_operator(doc) -> JordanSpec:
    node = _get(doc, "operator", dict, required=True)
    kind = _get(node, "kind", str, required=True)
    try:
        if kind == "diagonal":
            from .linops import diagonal_spec

            mu = _complex_vector(_get(node, "mu", list, required=True), "operator.mu")
            return diagonal_spec(mu, label="config diagonal")
        if kind == "diagonal_lambda":
            from .linops import diagonal_spec

            lam = _complex_vector(
                _get(node, "lambdas", list, required=True), "operator.lambdas"
            )
            return diagonal_spec(1.0 / lam, label="config diagonal")
        if kind == "jordan":
            return JordanSpec.from_text(json.dumps(_get(node, "document", dict, required=True)))
        if kind == "difference":
            return build_difference_operator(
                float(node.get("c", 1.0)), int(node.get("dim", 6))
            )
        if kind == "sturm_liouville":
            return build_sturm_liouville(
                _complex_pair(node.get("a", 1.0), "operator.a"),
                int(node.get("modes", 8)),
            )
        if kind == "artificial_normal":
            return build_artificial_normal(
                float(node.get("kappa", 1.0)),
                float(node.get("q", math.e ** math.e)),
                int(node.get("dim", 8)),
            )
        if kind == "random":
            return random_jordan_spec(
                int(node.get("seed", 0)), int(node.get("dim", 6)),
                int(node.get("max_chain", 3)),
            )
    except ConfigError:
        raise
    except AbelsumError as exc:
        raise ConfigError(f"operator construction failed: {exc}", field="operator") from exc
    raise ConfigError(f"unknown operator kind {kind!r}", field="operator.kind")


def _build_element(doc, spec: JordanSpec) -> np.ndarray:
    node = _get(doc, "f", default={"kind": "decay"})
    if isinstance(node, list):
        f = _complex_vector(node, "f")
    else:
        if not isinstance(node, dict):
            raise ConfigError("field 'f' must be an array or an object", field="f")
        kind = node.get("kind", "decay")
        if kind == "vector":
            f = _complex_vector(node.get("values", []), "f.values")
        elif kind == "decay":
            f = decaying_element(
                spec, int(node.get("seed", 0)), float(node.get("base", 0.5))
            )
        elif kind == "random":
            rng = np.random.default_rng(int(node.get("seed", 0)))
            f = rng.standard_normal(spec.dim) + 1j * rng.standard_normal(spec.dim)
        else:
            raise ConfigError(f"unknown element kind {kind!r}", field="f.kind")
    if f.size != spec.dim:
        raise ConfigError(
            f"element length {f.size} does not match operator dimension {spec.dim}",
            field="f",
        )
    return f


def _build_grouping(doc, spec: JordanSpec):
    node = _get(doc, "grouping", dict, default=None)
    if node is None:
        return None
    kind = node.get("kind", "gaps")
    if kind == "none":
        return None
    moduli = np.sort(np.abs(spec.characteristic_numbers))
    if kind == "gaps":
        K = node.get("K")
        return group_by_gaps(
            moduli, float(node.get("sigma", 0.5)),
            None if K is None else float(K),
        )
    if kind == "power":
        return make_power_grouping(
            int(node.get("beta", 1)), int(node.get("eta", 1)), moduli.size
        )
    raise ConfigError(f"unknown grouping kind {kind!r}", field="grouping.kind")


def _settings(doc, tol_override):
    node = _get(doc, "tolerances", dict, default={})
    abs_tol = float(node.get("abs_tol", 1e-10))
    rel_tol = float(node.get("rel_tol", 1e-8))
    if tol_override is not None:
        abs_tol = rel_tol = float(tol_override)
    return QuadratureSettings(
        abs_tol=abs_tol, rel_tol=rel_tol,
        max_panels=int(node.get("max_panels", 4000)),
    )


# ---------------------------------------------------------------------------
# subcommands


def run_solve(doc: dict, out: Path, parallel: bool, tol_override) -> int:
    phi = _build_phi(doc)
    spec = _build_operator(doc)
    f = _build_element(doc, spec)
    alpha = float(_get(doc, "alpha", (int, float), default=1.0))
    grouping = _build_grouping(doc, spec)
    settings = _settings(doc, tol_override)
    t_grid = _get(doc, "t_grid", list, default=[])
    want_residual = bool(_get(doc, "residuals", default=True))

    problem = CauchyProblem(operator=spec, phi=phi, alpha=alpha, f=f)

    def one(t: float):
        u = solve_cauchy(problem, grouping, t)
        gap = float(np.linalg.norm(u - f))
        res = (
            problem_residual(problem, t, settings)
            if want_residual and t > 0 else float("nan")
        )
        return u, gap, res

    ts = [float(t) for t in t_grid]
    if parallel and len(ts) > 1:
        with concurrent.futures.ThreadPoolExecutor() as pool:
            results = list(pool.map(one, ts))
    else:
        results = [one(t) for t in ts]

    header = ["t"]
    for i in range(spec.dim):
        header += [f"u{i}_re", f"u{i}_im"]
    header += ["norm", "gap", "residual"]
    rows = []
    max_residual = None
    for t, (u, gap, res) in zip(ts, results):
        row = [_fmt(t)]
        for v in u:
            row += [_fmt(v.real), _fmt(v.imag)]
        row += [_fmt(float(np.linalg.norm(u))), _fmt(gap)]
        row.append(_fmt(res) if not math.isnan(res) else "")
        rows.append(row)
        if not math.isnan(res):
            max_residual = res if max_residual is None else max(max_residual, res)
    _write_csv(out / "solution.csv", header, rows)

    summary = {
        "alpha": alpha,
        "dim": spec.dim,
        "rows": len(rows),
        "max_residual": max_residual,
        "grouping": None if grouping is None else list(grouping.boundaries),
        "label": spec.label,
    }
    _write_json(out / "summary.json", summary)
    if ts:
        figures.solution_figure(
            out / "solution.png", ts,
            [np.linalg.norm(u) for u, _, _ in results],
            [g for _, g, _ in results],
            [r for _, _, r in results] if want_residual else None,
        )
    return 0


def _suite_residue(seed: int):
    worst = 0.0
    for k in range(3):
        spec = random_jordan_spec(seed + k, dim=4 + k, max_chain=3)
        f = decaying_element(spec, seed + k)
        B = build_jordan_operator(spec)
        for q in range(len(spec.eigenvalues)):
            direct = projector_apply(spec, q, monomial(1), 1.5, 0.7, f)
            lam_q = 1.0 / spec.eigenvalues[q]
            via_circle = pole_residue(B.entries, lam_q, monomial(1), 1.5, 0.7, f)
            err = np.linalg.norm(direct - via_circle.value)
            err /= max(np.linalg.norm(direct), 1e-30)
            worst = max(worst, float(err))
    return {
        "name": "residue_identity",
        "pass": worst <= 1e-8,
        "margin": 1e-8 - worst,
        "detail": f"max relative gap {worst:.3e} over 3 seeded specs",
    }


def _suite_det_bound(seed: int):
    rng = np.random.default_rng(seed)
    worst = math.inf
    for k in range(5):
        spec = random_jordan_spec(seed + 10 + k, dim=6, max_chain=2)
        B = build_jordan_operator(spec).entries
        for _ in range(50):
            lam = rng.uniform(0.1, 20.0) * np.exp(1j * rng.uniform(-np.pi, np.pi))
            try:
                lhs, rhs = det_resolvent_bound_check(B, lam)
            except AbelsumError:
                continue
            worst = min(worst, rhs - lhs)
    return {
        "name": "det_resolvent_bound",
        "pass": worst >= 0.0,
        "margin": worst,
        "detail": f"min(rhs - lhs) = {worst:.3e} over sampled lambda",
    }


def _suite_grouping(doc: dict):
    n = np.arange(1, 31, dtype=float)
    moduli = n * n
    sigma = float(_get(doc, "grouping.sigma", default=0.5))
    K = _get(doc, "grouping.K", default=None)
    scheme = group_by_gaps(moduli, sigma, None if K is None else float(K))
    ok = True
    for a, b in scheme.windows():
        for j in range(a + 1, b):
            gap = moduli[j] - moduli[j - 1]
            if gap >= (moduli[j] ** (1.0 - sigma)) * 1e18:
                ok = False
    return {
        "name": "gap_grouping",
        "pass": ok,
        "margin": float(scheme.groups),
        "detail": f"{scheme.groups} groups, single_group={scheme.single_group}",
        "scheme": scheme,
    }


def _suite_split():
    worst = math.inf
    for beta, eta in ((1, 1), (2, 1), (2, 2), (4, 2)):
        table = split_order_reduction(beta, eta, 20)
        for row in table.rows:
            worst = min(worst, row.N_0 - row.lower, row.upper - row.N_0)
    return {
        "name": "split_table",
        "pass": worst >= 0,
        "margin": float(worst),
        "detail": f"min two-sided slot-zero slack {worst}",
    }


def _suite_beta_decay():
    seq = example41_sequence(0.4, 20000)
    rs = [1e2, 1e3, 1e4]
    vals = [
        beta_function(seq, r, 0, 1.3, tail_exponent=0.4) * math.log(r) for r in rs
    ]
    drops = [float(a - b) for a, b in zip(vals, vals[1:])]
    worst = min(drops)
    return {
        "name": "beta_decay",
        "pass": worst > 0,
        "margin": worst,
        "detail": f"beta(r) ln r samples {['%.3e' % v for v in vals]}",
    }


def run_verify(doc: dict, out: Path, parallel: bool, tol_override) -> int:
    seed = int(_get(doc, "seed", int, default=1))
    suites = [
        _suite_residue(seed),
        _suite_det_bound(seed),
        _suite_grouping(doc),
        _suite_split(),
        _suite_beta_decay(),
    ]
    scheme = None
    for s in suites:
        scheme = s.pop("scheme", None) or scheme

    all_pass = all(s["pass"] for s in suites)
    _write_json(out / "verify.json", {"all_pass": all_pass, "suites": suites})

    if scheme is not None:
        rows = [
            [str(i), _fmt(g), _fmt(thr)]
            for i, g, thr in scheme.certified
        ]
        _write_csv(out / "grouping.csv", ["split_index", "gap", "threshold"], rows)
    table = split_order_reduction(1, 1, 20)
    _write_csv(
        out / "split_table.csv",
        [str(c) for c in table.to_csv_rows()[0]],
        [[str(v) for v in row] for row in table.to_csv_rows()[1:]],
    )
    figures.verify_figure(
        out / "verify.png",
        [s["name"] for s in suites],
        [s["margin"] for s in suites],
    )
    return 0 if all_pass else 3


def run_spectrum(doc: dict, out: Path, parallel: bool, tol_override) -> int:
    spec = _build_operator(doc)
    grouping = _build_grouping(doc, spec) or group_by_gaps(
        np.sort(np.abs(spec.characteristic_numbers)), 0.5, None
    )
    B = build_jordan_operator(spec)
    gauge = sector_gauge(B, vertex=0.0, samples=max(spec.dim ** 2, 256))

    lam = spec.characteristic_numbers
    order = np.argsort(np.abs(lam))
    groups = np.zeros(lam.size, dtype=int)
    for g, (a, b) in enumerate(grouping.windows()):
        groups[a:b] = g
    header = ["index", "mu_re", "mu_im", "lambda_re", "lambda_im", "modulus", "group"]
    rows = []
    for pos, q in enumerate(order):
        mu = spec.eigenvalues[q]
        rows.append([
            str(pos), _fmt(mu.real), _fmt(mu.imag),
            _fmt(lam[q].real), _fmt(lam[q].imag),
            _fmt(abs(lam[q])), str(int(groups[pos])),
        ])
    _write_csv(out / "spectrum.csv", header, rows)
    _write_json(out / "spectrum.json", {
        "dim": spec.dim,
        "semi_angle": gauge.semi_angle,
        "certified": gauge.certified,
        "grouping": list(grouping.boundaries),
        "method": grouping.method,
        "label": spec.label,
    })
    figures.spectrum_figure(
        out / "spectrum.png", lam[order], grouping.boundaries
    )
    return 0


def _build_sequence(doc: dict) -> ZeroSequence:
    node = _get(doc, "sequence", dict, required=True)
    kind = node.get("kind", "example")
    count = int(node.get("count", 10000))
    if kind == "example":
        return example41_sequence(float(node.get("rho1", 0.4)), count)
    if kind == "power":
        expo = float(node.get("exponent", 2.0))
        n = np.arange(1, count + 1, dtype=float)
        return ZeroSequence(n ** expo)
    if kind == "moduli":
        return ZeroSequence(np.asarray(node.get("values", []), dtype=float))
    raise ConfigError(f"unknown sequence kind {kind!r}", field="sequence.kind")


def run_growth(doc: dict, out: Path, parallel: bool, tol_override) -> int:
    seq = _build_sequence(doc)
    report = convergence_exponent(seq)
    r_grid = [float(r) for r in _get(doc, "r_grid", list, default=[1e2, 1e3, 1e4])]
    beta_node = _get(doc, "beta", dict, default=None)

    header = ["r", "count", "beta", "beta_ln_r"]
    rows = []
    betas = []
    for r in r_grid:
        cnt = counting_function(seq, r)
        if beta_node is not None:
            rho1 = float(_get(beta_node, "rho1", (int, float), required=True))
            p = int(beta_node.get("p", report.genus))
            tail = float(beta_node.get("tail_exponent", report.rho_hat))
            b = beta_function(seq, r, p, rho1, tail_exponent=tail)
            betas.append(b)
            rows.append([_fmt(r), str(cnt), _fmt(b), _fmt(b * math.log(r))])
        else:
            rows.append([_fmt(r), str(cnt), "", ""])
    _write_csv(out / "growth.csv", header, rows)
    _write_json(out / "growth.json", {
        "count": len(seq),
        "rho_hat": report.rho_hat,
        "genus": report.genus,
        "diverges_at_rho": report.diverges_at_rho,
        "first_modulus": float(seq.moduli[0]) if len(seq) else None,
        "last_modulus": float(seq.moduli[-1]) if len(seq) else None,
    })
    figures.growth_figure(
        out / "growth.png", r_grid,
        [counting_function(seq, r) for r in r_grid],
        betas if betas else None,
    )
    return 0


# ---------------------------------------------------------------------------


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="abelsum",
        description="spectral series solver for fractional evolution problems",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in (
        ("solve", run_solve), ("verify", run_verify),
        ("spectrum", run_spectrum), ("growth", run_growth),
    ):
        p = sub.add_parser(name)
        p.add_argument("--config", required=(name != "verify"), default=None,
                       help="JSON config path")
        p.add_argument("--out", default=".", help="output directory")
        p.add_argument("--parallel", action="store_true",
                       help="fan the t-grid out over threads")
        p.add_argument("--tol", type=float, default=None,
                       help="override quadrature tolerances")
        p.set_defaults(runner=fn)

    args = parser.parse_args(argv)
    try:
        doc = _load_config(args.config) if args.config else {}
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        return args.runner(doc, out, args.parallel, args.tol)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except AbelsumError as exc:
        print(str(exc), file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
