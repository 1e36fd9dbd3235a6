"""Experiment runner: cross-validation of the smoothing backends and the
tomography reproduction, driven by key=value config files.

Exit codes: 0 success, 2 config error, 3 numerical failure, 4 stopping rule
never satisfied.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, fields, replace
from pathlib import Path

import numpy as np

from . import bvp, discrete, kernel, multiplier, radon, spectral, wavelet
from .core import Domain, GridFn, InnerProductSpec, check_adjoint, l2_norm
from .inverse import (
    DiscrepancyStop,
    InverseProblem,
    StoppingRuleNotMet,
    add_noise,
    landweber,
    tikhonov,
)
from .multiplier import NormVariant, SobolevSpec

EXPERIMENTS = ("CrossCheck1D", "AdjointSmoothing2D", "RadonRecon",
               "NormEquivalence", "KernelAsymptotics")
BACKENDS = ("multiplier", "kernel", "wavelet", "bvp", "eigs", "discrete")
PHANTOMS = ("smooth", "shepp_logan")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    experiment: str
    backend: str = "multiplier"
    s: float = 0.5
    n: int = 64
    n_offsets: int = 100
    n_angles: int = 60
    noise_rel: float = 0.10
    tau: float = 1.01
    step: float = 0.0  # 0 -> automatic 0.9/||A||^2
    max_iter: int = 20000
    seed: int = 1234
    phantom: str = "smooth"
    out_dir: str = "out"


_EXPERIMENT_DEFAULTS = {
    "CrossCheck1D": {"n": 1024, "s": 1.0},
    "AdjointSmoothing2D": {"n": 65, "s": 1.0},
    "RadonRecon": {"n": 64, "s": 0.5},
    "NormEquivalence": {},
    "KernelAsymptotics": {},
}

_FIELD_TYPES = {f.name: f.type for f in fields(RunConfig)}


def _convert(key: str, raw: str, line_no: int):
    kind = _FIELD_TYPES[key]
    try:
        if kind == "int":
            return int(raw)
        if kind == "float":
            return float(raw)
        return raw
    except ValueError as exc:
        raise ConfigError(f"line {line_no}: cannot parse {key}={raw!r}") from exc


def _validate(cfg: RunConfig) -> RunConfig:
    if cfg.experiment not in EXPERIMENTS:
        raise ConfigError(f"unknown experiment {cfg.experiment!r}; "
                          f"choose one of {', '.join(EXPERIMENTS)}")
    if cfg.backend not in BACKENDS:
        raise ConfigError(f"unknown backend {cfg.backend!r}")
    if cfg.phantom not in PHANTOMS:
        raise ConfigError(f"unknown phantom {cfg.phantom!r}")
    if cfg.tau <= 1.0:
        raise ConfigError("tau must exceed 1")
    if cfg.noise_rel < 0:
        raise ConfigError("noise_rel must be >= 0")
    if cfg.s < 0:
        raise ConfigError("s must be >= 0")
    if cfg.n < 2 or cfg.n_offsets < 1 or cfg.n_angles < 1:
        raise ConfigError("grid sizes must be positive (n >= 2)")
    if cfg.max_iter < 1:
        raise ConfigError("max_iter must be >= 1")
    if cfg.step < 0:
        raise ConfigError("step must be >= 0 (0 selects the automatic step)")
    return cfg


def parse_config(text: str, experiment: str | None = None) -> RunConfig:
    """Parse key=value lines ('#' comments) into a validated RunConfig."""
    values: dict = {}
    for line_no, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"line {line_no}: expected key=value, got {line!r}")
        key, raw = (part.strip() for part in stripped.split("=", 1))
        if key not in _FIELD_TYPES:
            raise ConfigError(f"line {line_no}: unknown key {key!r}")
        values[key] = _convert(key, raw, line_no)
    if experiment is not None:
        values["experiment"] = experiment
    if "experiment" not in values:
        raise ConfigError("missing required key 'experiment'")
    merged = dict(_EXPERIMENT_DEFAULTS.get(values["experiment"], {}))
    merged.update(values)
    return _validate(RunConfig(**merged))


def serialize_config(cfg: RunConfig) -> str:
    lines = [f"{f.name}={getattr(cfg, f.name)}" for f in fields(RunConfig)]
    return "\n".join(lines) + "\n"


# -- backends for the 1D cross check ---------------------------------------------

def _bandlimited(dom: Domain, kmax: int, seed: int) -> GridFn:
    rng = np.random.default_rng(seed)
    x = dom.axes()[0]
    length = dom.lengths[0]
    vals = np.zeros(dom.grid_size)
    for k in range(1, kmax + 1):
        a, b = rng.standard_normal(2)
        vals += a * np.cos(2 * np.pi * k * x / length) \
            + b * np.sin(2 * np.pi * k * x / length)
    return GridFn(dom, vals)


def _crosscheck_table(n: int, s: float, seed: int):
    dom = Domain.torus(1, n)
    spec = SobolevSpec(s, NormVariant.BESSEL_V1)
    u = _bandlimited(dom, 16, seed)
    results = {"multiplier": multiplier.adjoint_embedding(u, spec)}
    results["kernel"] = kernel.convolve_adjoint(u, s)
    if s == int(s) and int(s) in (1, 2):
        results["bvp"] = bvp.solve_torus_helmholtz(u, int(s))
    svd = spectral.svd_from_multiplier(spec, dom, 2 * 16 + 1)
    results["svd"] = GridFn(dom, svd.apply_adjoint(u).values.real)
    fns, _ = discrete.fourier_mode_basis(dom, 16)
    setting = discrete.assemble(fns, fns, InnerProductSpec.sobolev_spec(spec))
    _, gram_fn = discrete.projected_adjoint(setting, u)
    results["discrete"] = GridFn(dom, gram_fn.values.real)
    ref = results["multiplier"]
    scale = l2_norm(u)
    rows = []
    names = list(results)
    for i, a in enumerate(names):
        for b in names[i + 1:]:
            rel = l2_norm(results[a] - results[b]) / scale
            rows.append((a, b, rel))
    gates = {("multiplier", "kernel"): 1e-3,
             ("multiplier", "svd"): 1e-10,
             ("multiplier", "discrete"): 1e-12,
             ("multiplier", "bvp"): 1e-3}
    failures = [f"{a} vs {b}: {rel:.3e}" for a, b, rel in rows
                if (a, b) in gates and rel > gates[(a, b)]]
    return rows, failures


def _run_crosscheck(cfg: RunConfig, out: Path) -> int:
    rows, failures = _crosscheck_table(cfg.n, cfg.s, cfg.seed)
    with open(out / "crosscheck.csv", "w", encoding="ascii") as fh:
        fh.write("# crosscheck-1d: pairwise relative L2 discrepancies between "
                 "smoothing backends\n")
        fh.write("backend_a,backend_b,rel_l2\n")
        for a, b, rel in rows:
            fh.write(f"{a},{b},{rel:.17g}\n")
    _summary(out, cfg, {
        "pairs": {f"{a}|{b}": rel for a, b, rel in rows},
        "failures": failures,
    })
    return 3 if failures else 0


def _run_smoothing_2d(cfg: RunConfig, out: Path) -> int:
    dom = Domain.rectangle(1.0, 1.0, cfg.n, cfg.n)
    X, Y = np.meshgrid(*dom.axes(), indexing="ij")
    rng = np.random.default_rng(cfg.seed)
    bumps = (np.exp(-((X - 0.35) ** 2 + (Y - 0.6) ** 2) / 0.01)
             + 0.7 * np.exp(-((X - 0.7) ** 2 + (Y - 0.3) ** 2) / 0.005))
    u = GridFn(dom, (bumps + 0.2 * rng.standard_normal(X.shape)).ravel())
    z = bvp.solve_neumann_helmholtz(u)
    radon.write_pgm(out / "input.pgm", u.to_array().real,
                    comment="adjoint-smoothing-2d: input")
    radon.write_pgm(out / "smoothed.pgm", z.to_array().real,
                    comment="adjoint-smoothing-2d: order-1 smoothing via Neumann solve")
    spec2 = bvp.BvpSpec(1, bvp.BoundaryKind.NEUMANN_LIKE, dom)
    _summary(out, cfg, {
        "input_l2": l2_norm(u),
        "smoothed_l2": l2_norm(z),
        "variational_gap": bvp.variational_gap(z, u, spec2),
    })
    return 0


def _make_smoother(cfg: RunConfig, spec: SobolevSpec, dom: Domain):
    if cfg.backend == "multiplier":
        return None
    if cfg.backend == "kernel":
        return lambda u: kernel.convolve_adjoint(u, spec.order_s)
    if cfg.backend == "wavelet":
        levels = int(np.log2(dom.shape[0]))
        return lambda u: wavelet.adjoint_embedding_wavelet(
            u, spec.order_s, wavelet.DB4, levels)
    if cfg.backend == "bvp" and dom.ndim == 1:
        return lambda u: bvp.solve_torus_helmholtz(u, int(round(spec.order_s)))
    raise ConfigError(
        f"backend {cfg.backend!r} not available for this experiment/domain")


def _run_radon(cfg: RunConfig, out: Path) -> int:
    geom = radon.RadonGeometry(cfg.n, cfg.n_offsets, cfg.n_angles)
    op = radon.RadonOperator(geom)
    linop = op.as_linop()
    ph = (radon.smooth_phantom(cfg.n, seed=cfg.seed) if cfg.phantom == "smooth"
          else radon.shepp_logan(cfg.n))
    y = op.forward(ph.image)
    ydelta, delta = add_noise(y, cfg.noise_rel, seed=cfg.seed)
    radon.write_pgm(out / "phantom.pgm", ph.to_array(),
                    comment=f"radon-recon: {cfg.phantom} ground truth")
    radon.write_csv(out / "sinogram.csv", ydelta.values,
                    header="radon-recon: noisy sinogram (offsets x angles)")
    err_spec = SobolevSpec(cfg.s if cfg.s > 0 else 0.5, NormVariant.TORUS_S)
    report = {"delta": delta, "tau": cfg.tau}
    errors = {}
    for s in (0.0, cfg.s):
        tag = f"s{s:g}".replace(".", "p")
        spec = SobolevSpec(s, NormVariant.TORUS_S) if s > 0 else None
        smoother = _make_smoother(cfg, spec, geom.image_domain) if spec else None
        problem = InverseProblem(linop, ydelta, noise_level=delta,
                                 embedding=spec, smoother=smoother)
        step = cfg.step if cfg.step > 0 else None
        u, log = landweber(problem, step=step, max_iter=cfg.max_iter,
                           stop=DiscrepancyStop(cfg.tau))
        rec = GridFn(u.domain, u.values.real)
        diff = rec - ph.image
        rel_l2 = l2_norm(diff) / l2_norm(ph.image)
        rel_hs = (multiplier.sobolev_norm(diff, err_spec)
                  / multiplier.sobolev_norm(ph.image, err_spec))
        errors[s] = rel_hs
        radon.write_pgm(out / f"recon_{tag}.pgm", rec.to_array().real,
                        comment=f"radon-recon: landweber reconstruction, order {s:g}")
        radon.write_csv(out / f"residuals_{tag}.csv",
                        np.array(log.residuals)[:, None],
                        header=f"radon-recon: residual history, order {s:g}")
        report[tag] = {
            "stop_index": len(log.residuals) - 1,
            "final_residual": log.residuals[-1],
            "residual_history": f"residuals_{tag}.csv",
            "rel_error_l2": rel_l2,
            "rel_error_sobolev": rel_hs,
        }
    if cfg.s > 0:
        report["sobolev_error_reduction"] = (errors[0.0] - errors[cfg.s]) / errors[0.0]
    _summary(out, cfg, report)
    return 0


def _run_norm_equivalence(cfg: RunConfig, out: Path) -> int:
    orders = (1.0, 1.5, 2.0, 3.0)
    rows = []
    ok = True
    for s in orders:
        v1 = SobolevSpec(s, NormVariant.BESSEL_V1)
        v2 = SobolevSpec(s, NormVariant.BESSEL_V2)
        for k in range(0, 65):
            w1 = multiplier.sobolev_weight(k, v1)
            w2 = multiplier.sobolev_weight(k, v2)
            lo, hi = 0.5 * w2, 2.0 ** (s - 1) * w2
            ok = ok and (lo <= w1 <= hi)
            rows.append((s, k, w1 / lo - 1.0, hi / w1 - 1.0))
    with open(out / "margins.csv", "w", encoding="ascii") as fh:
        fh.write("# norm-equivalence: sandwich margins per frequency\n")
        fh.write("s,k,lower_margin,upper_margin\n")
        for s, k, lo_m, hi_m in rows:
            fh.write(f"{s},{k},{lo_m:.17g},{hi_m:.17g}\n")
    _summary(out, cfg, {
        "holds": ok,
        "min_lower_margin": min(r[2] for r in rows),
        "min_upper_margin": min(r[3] for r in rows),
    })
    return 0 if ok else 3


def _run_kernel_asymptotics(cfg: RunConfig, out: Path) -> int:
    cases = [
        ("large_x_n1_s2", kernel.KernelSpec(2.0, 1, kernel.EvalMode.CLOSED_FORM),
         kernel.AsymptoticRegime.LARGE_X, np.array([20.0]), 0.05),
        ("small_x_n2_s1", kernel.KernelSpec(1.0, 2),
         kernel.AsymptoticRegime.SMALL_X_S_LT_N, np.array([1e-3]), 0.05),
        ("small_x_n1_s1", kernel.KernelSpec(1.0, 1),
         kernel.AsymptoticRegime.SMALL_X_S_EQ_N, np.array([1e-4]), 0.10),
        ("const_n1_s2", kernel.KernelSpec(2.0, 1, kernel.EvalMode.CLOSED_FORM),
         kernel.AsymptoticRegime.SMALL_X_S_GT_N, np.array([1e-3]), 0.05),
    ]
    rows = []
    ok = True
    for name, spec, regime, xs, threshold in cases:
        dev = kernel.kernel_asymptotics_check(spec, regime, xs)
        rows.append((name, dev, threshold))
        ok = ok and dev < threshold
    with open(out / "ratios.csv", "w", encoding="ascii") as fh:
        fh.write("# kernel-asymptotics: max ratio deviation per regime\n")
        fh.write("case,deviation,threshold\n")
        for name, dev, threshold in rows:
            fh.write(f"{name},{dev:.17g},{threshold}\n")
    _summary(out, cfg, {name: dev for name, dev, _ in rows} | {"holds": ok})
    return 0 if ok else 3


def _summary(out: Path, cfg: RunConfig, payload: dict) -> None:
    doc = {"config": {f.name: getattr(cfg, f.name) for f in fields(RunConfig)},
           "results": payload}
    with open(out / "summary.json", "w", encoding="ascii") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True, default=float)
        fh.write("\n")


_RUNNERS = {
    "CrossCheck1D": _run_crosscheck,
    "AdjointSmoothing2D": _run_smoothing_2d,
    "RadonRecon": _run_radon,
    "NormEquivalence": _run_norm_equivalence,
    "KernelAsymptotics": _run_kernel_asymptotics,
}


def run(cfg: RunConfig) -> int:
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    try:
        return _RUNNERS[cfg.experiment](cfg, out)
    except StoppingRuleNotMet as exc:
        print(f"stopping rule not satisfied: {exc}", file=sys.stderr)
        return 4
    except ConfigError:
        raise
    except (RuntimeError, ValueError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


def selftest() -> int:
    """Compact cross-representation suite; prints one pass/fail line each."""
    checks = []

    rows, failures = _crosscheck_table(512, 1.0, seed=7)
    checks.append(("crosscheck-1d backends", not failures))

    dom = Domain.torus(1, 64)
    atom_ok = True
    for j in (0, 2):
        dec = wavelet.fwt(GridFn(dom, np.zeros(64)), wavelet.DB4, 4)
        details = [np.zeros_like(d) for d in dec.details]
        details[j][1] = 1.0
        atom = wavelet.ifwt(wavelet.WaveletDecomposition(dom, wavelet.DB4,
                                                         dec.approx, tuple(details)))
        out = wavelet.adjoint_embedding_wavelet(atom, 1.0, wavelet.DB4, 4)
        atom_ok &= bool(np.max(np.abs(out.values - 2.0 ** (-2 * j) * atom.values))
                        < 1e-12)
    checks.append(("wavelet atom eigenvalues", atom_ok))

    idom = Domain.interval(0.0, 1.0, 129)
    u = GridFn(idom, np.random.default_rng(0).standard_normal(129))
    z = bvp.solve_neumann_helmholtz(u)
    v = GridFn(idom, np.random.default_rng(1).standard_normal(129))
    gap = abs(bvp.h1_inner(z, v) - bvp.mass_inner(u, v))
    checks.append(("bvp adjoint identity", gap < 1e-9))

    geom = radon.RadonGeometry(16, 24, 8)
    defect = check_adjoint(radon.RadonOperator(geom).as_linop(), trials=10, seed=3)
    checks.append(("radon adjoint defect", defect < 1e-10))

    width = max(len(name) for name, _ in checks)
    all_ok = True
    for name, ok in checks:
        print(f"{name:<{width}}  {'PASS' if ok else 'FAIL'}")
        all_ok &= ok
    return 0 if all_ok else 3


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="sobolev-adjoint",
        description="Smoothing-operator cross-validation and tomography "
                    "experiments.")
    sub = parser.add_subparsers(dest="command", required=True)
    run_p = sub.add_parser("run", help="run an experiment from a config file")
    run_p.add_argument("--config", required=True, type=Path)
    run_p.add_argument("--experiment", choices=EXPERIMENTS)
    run_p.add_argument("--backend", choices=BACKENDS)
    run_p.add_argument("--seed", type=int)
    run_p.add_argument("--out", type=Path)
    sub.add_parser("selftest", help="run the cross-representation self test")
    args = parser.parse_args(argv)

    if args.command == "selftest":
        return selftest()
    try:
        text = args.config.read_text(encoding="utf-8")
    except OSError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    try:
        cfg = parse_config(text, experiment=args.experiment)
        overrides = {}
        if args.backend:
            overrides["backend"] = args.backend
        if args.seed is not None:
            overrides["seed"] = args.seed
        if args.out is not None:
            overrides["out_dir"] = str(args.out)
        if overrides:
            cfg = _validate(replace(cfg, **overrides))
        return run(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
