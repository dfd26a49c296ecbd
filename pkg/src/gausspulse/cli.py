"""Command-line front end: pulse samples, filter export, verification and reconstruction.

Exit codes: 0 success, 1 verification failure, 2 usage error, 3 numeric failure.
Heavy modules are imported inside the commands so that ``verify --suite
identities`` never touches the pulse code.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import __version__
from .params import PulseParams
from .special_functions import Nome, TruncationPolicy

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3

PULSES = ("phi", "capital_phi", "phi_int", "s0", "phi_ortho", "varphi_int")
FILTERS = ("H1", "H2", "H3", "H4", "coefficients")
SUITES = ("identities", "pulses", "filters", "sampling", "all")


class UsageError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    beta: float = 1.0
    lam: float = 1.0
    order_N: int = 10
    grid_start: float | None = None
    grid_step: float | None = None
    grid_count: int | None = None
    rel_tol: float = 1e-16
    output_format: str = "json"
    seed: int = 0

    def __post_init__(self):
        for name in ("beta", "lam", "rel_tol"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise UsageError(f"--{name.replace('lam', 'lambda').replace('_', '-')} must be positive and finite")
        if self.order_N < 0:
            raise UsageError("--order must be non-negative")
        if self.grid_count is not None and self.grid_count < 1:
            raise UsageError("--count must be at least 1")
        if self.grid_step is not None and not (math.isfinite(self.grid_step) and self.grid_step > 0):
            raise UsageError("--step must be positive and finite")
        if self.grid_start is not None and not math.isfinite(self.grid_start):
            raise UsageError("--start must be finite")
        if self.output_format not in ("json", "csv"):
            raise UsageError("--format must be json or csv")
        if self.seed < 0:
            raise UsageError("--seed must be non-negative")

    @property
    def params(self) -> PulseParams:
        return PulseParams(self.beta, self.lam)

    @property
    def policy(self) -> TruncationPolicy:
        return TruncationPolicy(rel_tol=self.rel_tol)

    def grid(self, start: float, step: float, count: int) -> np.ndarray:
        s = start if self.grid_start is None else self.grid_start
        h = step if self.grid_step is None else self.grid_step
        n = count if self.grid_count is None else self.grid_count
        return s + h * np.arange(n)


# ---------------------------------------------------------------------------
# Output
# ---------------------------------------------------------------------------


def _meta(p: PulseParams, **extra) -> dict:
    meta = {"beta": p.beta, "lambda": p.lam, "q": p.q, "Q0": p.Q0, "tool_version": __version__}
    meta.update(extra)
    return meta


def _check_finite(obj) -> None:
    if isinstance(obj, float) and not math.isfinite(obj):
        raise FloatingPointError("non-finite number in output")
    if isinstance(obj, dict):
        for v in obj.values():
            _check_finite(v)
    elif isinstance(obj, (list, tuple)):
        for v in obj:
            _check_finite(v)


def render(meta: dict, data: list, fmt: str, csv_columns: list[str]) -> str:
    _check_finite(meta)
    _check_finite(data)
    if fmt == "json":
        return json.dumps({"meta": meta, "data": data}, indent=2, allow_nan=False) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(csv_columns)
    for row in data:
        w.writerow(["" if row.get(c) is None else repr(row[c]) if isinstance(row[c], float) else row[c]
                    for c in csv_columns])
    return buf.getvalue()


def _emit(text: str, output: str | None) -> None:
    if output:
        with open(output, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# pulse
# ---------------------------------------------------------------------------


def _pulse_evaluator(which: str) -> Callable:
    from . import pulse_shapes as ps

    return {
        "phi": lambda x, p, pol: ps.gaussian_phi(x, p),
        "capital_phi": lambda x, p, pol: ps.capital_phi(x, p),
        "phi_int": ps.phi_int_time,
        "s0": lambda x, p, pol: ps.s0_time(x, p),
        "phi_ortho": ps.phi_ortho_time,
        "varphi_int": ps.varphi_int_time,
    }[which]


def cmd_pulse(cfg: RunConfig, which: str) -> tuple[str, int]:
    from .filter_design import select_order

    p = cfg.params
    if not p.in_supported_region():
        raise UsageError(f"lambda*beta = {p.lam_beta:g} is outside the supported region [0.2, 5]")
    x = cfg.grid(-8 * p.lam, p.lam / 32, 513)
    vals = np.asarray(_pulse_evaluator(which)(x, p, cfg.policy), dtype=float)
    orders = {}
    if which == "phi_ortho":
        orders["coefficient_order"] = select_order(p, "H3", cfg.rel_tol, cfg.policy)
    meta = _meta(p, pulse=which, truncation=orders)
    data = [{"x": float(a), "value": float(b)} for a, b in zip(x, vals)]
    return render(meta, data, cfg.output_format, ["x", "value"]), EXIT_OK


# ---------------------------------------------------------------------------
# filter
# ---------------------------------------------------------------------------


def cmd_filter(cfg: RunConfig, which: str) -> tuple[str, int]:
    from . import filter_design as fd

    p = cfg.params
    N = cfg.order_N
    if which == "coefficients":
        a = fd.coefficients_a(p, N).values
        meta = _meta(p, filter="coefficients", order=N,
                     provenance="a_n = (-q)^n / (q^2;q^2)_n, closed form")
        data = [{"n": n, "coefficient": float(v)} for n, v in enumerate(a)]
        return render(meta, data, cfg.output_format, ["n", "coefficient"]), EXIT_OK
    f = {"H1": fd.build_H1, "H2": fd.build_H2, "H3": fd.build_H3, "H4": fd.build_H4}[which](p, N)
    meta = _meta(p, filter=which, order=N)
    if cfg.output_format == "json":
        return render(meta, [f.to_dict()], "json", []), EXIT_OK
    rows = [{"kind": "numerator", "n": i, "coefficient": float(v)} for i, v in enumerate(f.numerator)]
    rows += [{"kind": "denominator", "n": i, "coefficient": float(v)} for i, v in enumerate(f.denominator)]
    if f.poles is not None:
        rows += [{"kind": "pole", "n": i, "coefficient": float(v)} for i, v in enumerate(f.poles)]
    rows.append({"kind": "gain", "n": 0, "coefficient": float(f.gain)})
    return render(meta, rows, "csv", ["kind", "n", "coefficient"]), EXIT_OK


# ---------------------------------------------------------------------------
# verify
# ---------------------------------------------------------------------------


def _identity_checks(p: PulseParams, policy: TruncationPolicy):
    import time

    from . import special_functions as sf
    from .oracles import _report

    q = p.q
    out = []
    for kind, z in (("id_24", 0.5), ("id_25", 0.5), ("id_id1", 2.0), ("id_id2", 2.0)):
        t0 = time.perf_counter()
        lhs, rhs = sf.euler_identity_sides(kind, z, q, 40, policy=policy)
        out.append(_report(f"identity:{kind}", abs(lhs - rhs) / max(1.0, abs(lhs)), 1e-12, t0, p, kind, z))
    t0 = time.perf_counter()
    lhs, rhs = sf.jacobi_triple_product_sides(0.7, q, 40, policy=policy)
    out.append(_report("identity:jacobi_triple_product", abs(lhs - rhs) / max(1.0, abs(lhs)), 1e-12, t0, p))
    t0 = time.perf_counter()
    z = np.arange(256) / 256
    a = np.asarray(sf.theta3(z, p.tau, "nome_series", policy))
    b = np.asarray(sf.theta3(z, p.tau, "modular_series", policy))
    out.append(_report("identity:theta3_dual", np.max(np.abs(a - b)) / np.max(np.abs(a)), 1e-12, t0, p))
    return out


def _pulse_checks(p: PulseParams, policy: TruncationPolicy):
    import time

    from . import pulse_shapes as ps
    from .oracles import _report, dft_pair_check, periodization_check

    out = []
    t0 = time.perf_counter()
    n = np.arange(-10, 11)
    isi = np.max(np.abs(ps.phi_int_time(n * p.lam, p, policy) - (n == 0)))
    out.append(_report("pulse:isi_free", isi, 1e-10, t0, p))

    t0 = time.perf_counter()
    w = np.linspace(-3 * p.Lambda, 3 * p.Lambda, 513)
    lhs = ps.phi_int_freq(w, p, policy)
    rhs = ps.SQRT2PI * np.abs(ps.phi_ortho_freq(w, p, policy)) ** 2
    out.append(_report("pulse:spectral_factorization", factorization_deviation(lhs, rhs), 1e-9, t0, p))

    out.append(periodization_check(p, lambda om, pp: ps.phi_int_freq(om, pp, policy)))

    half, step = dft_window(p)
    pairs = [
        ("phi", ps.gaussian_phi, ps.gaussian_phi_hat),
        ("capital_phi", ps.capital_phi, ps.capital_phi_hat),
        ("phi_int", lambda x, pp: ps.phi_int_time(x, pp, policy), lambda w_, pp: ps.phi_int_freq(w_, pp, policy)),
        ("s0", ps.s0_time, ps.s0_freq),
        ("phi_ortho", lambda x, pp: ps.phi_ortho_time(x, pp, policy),
         lambda w_, pp: ps.phi_ortho_freq(w_, pp, policy)),
    ]
    for name, te, fe in pairs:
        out.append(dft_pair_check(name, te, fe, p, half, step))

    t0 = time.perf_counter()
    x = ps.default_time_grid(p)
    diff = float(np.max(np.abs(ps.phi_int_time(x, p, policy) - ps.s0_time(x, p))))
    if math.isclose(p.lam_beta, 1.0, rel_tol=1e-12):
        out.append(_report("pulse:s0_regression", diff, S0_REGRESSION_TOL, t0, p))
    else:
        r = _report("pulse:s0_regression", diff, math.inf, t0, p, flagged=True,
                    note="threshold pinned only at lambda*beta = 1")
        out.append(r)
    return out


S0_REGRESSION_TOL = 1e-14


def factorization_deviation(lhs: np.ndarray, rhs: np.ndarray) -> float:
    """Pointwise relative deviation over the points where the reference is a normal float.

    Subnormal values carry too few significant bits for a relative comparison.
    """
    ref = np.abs(lhs)
    normal = ref >= np.finfo(float).tiny
    diff = np.abs(lhs - rhs)
    rel = np.divide(diff, ref, out=np.zeros_like(ref), where=normal)
    return float(np.max(rel))


def dft_window(p: PulseParams) -> tuple[float, float]:
    """Half-width and step for the Riemann-sum transform oracle."""
    half = p.lam * max(400.0, 240.0 / p.lam_beta**2)
    step = min(p.lam, 1.0 / p.beta) / 8
    return half, step


def _filter_checks(p: PulseParams, policy: TruncationPolicy):
    import time

    from . import filter_design as fd
    from .oracles import _report, a_n_contour_oracle, gram_orthonormality_check, pole_root_check, \
        residue_sum_oracle

    out = []
    a = fd.coefficients_a(p, 10)
    t0 = time.perf_counter()
    dev = max(abs(a_n_contour_oracle(p, n) - a[n]) for n in range(-3, 11))
    out.append(_report("filter:a_n_contour", dev, 1e-10, t0, p))
    t0 = time.perf_counter()
    dev = max(abs(residue_sum_oracle(p, n) - a[n]) for n in range(-3, 11))
    out.append(_report("filter:a_n_residue", dev, 1e-10, t0, p))
    out.append(gram_orthonormality_check(p))

    t0 = time.perf_counter()
    # a 40-stage cascade still drops stages of size q^81 at lambda*beta = 1, so
    # each realization gets at least its certified order
    orders = {name: max(40, fd.select_order(p, name, 1e-12, policy)) for name in ("H1", "H2", "H3")}
    h = [fd.impulse_response(b(p, orders[name]), 21)
         for name, b in (("H1", fd.build_H1), ("H2", fd.build_H2), ("H3", fd.build_H3))]
    dev = max(np.max(np.abs(h[i] - h[j])) for i in range(3) for j in range(i + 1, 3))
    out.append(_report("filter:impulse_equivalence", dev, 1e-10, t0, p, tuple(orders.values())))

    for name, build in (("H2", fd.build_H2), ("H4", fd.build_H4)):
        worst = None
        for N in (1, 5, 10, 20):
            r = pole_root_check(build(p, N))
            if worst is None or r.measured > worst.measured:
                worst = r
        worst.check_name = f"filter:pole_roots:{name}"
        out.append(worst)

    t0 = time.perf_counter()
    theta = 2 * math.pi * np.arange(64) / 64
    dev = 0.0
    for build in (fd.build_H1, fd.build_H2, fd.build_H3, fd.build_H4):
        f = build(p, 20)
        g = fd.RationalFilter.from_dict(json.loads(json.dumps(f.to_dict())))
        dev = max(dev, float(np.max(np.abs(f.frequency_response(theta) - g.frequency_response(theta)))))
    out.append(_report("filter:json_round_trip", dev, 1e-14, t0, p))
    return out


def _sampling_checks(p: PulseParams, policy: TruncationPolicy, seed: int):
    import time

    from .oracles import _report
    from .sampling import GaussianMixture, phi_descriptor, run_pipeline

    x = p.lam * np.linspace(-6, 6, 241)
    out = []
    for name, f, offset in (("phi", phi_descriptor(p), 0.0),
                            ("mixture", GaussianMixture.random(3, p, seed), 0.0),
                            ("phi_offset", phi_descriptor(p), 0.3 * p.lam)):
        t0 = time.perf_counter()
        res = run_pipeline(f, p, x, offset=offset, policy=policy)
        # bound check expressed as measured <= tolerance
        out.append(_report(f"sampling:bound:{name}", res.error_sup**2, res.bound, t0, p, seed))
    return out


def run_suite(p: PulseParams, suite: str, policy: TruncationPolicy, seed: int = 0) -> list:
    reports = []
    if suite in ("identities", "all"):
        reports += _identity_checks(p, policy)
    if suite in ("pulses", "all"):
        reports += _pulse_checks(p, policy)
    if suite in ("filters", "all"):
        reports += _filter_checks(p, policy)
    if suite in ("sampling", "all"):
        reports += _sampling_checks(p, policy, seed)
    return sorted(reports, key=lambda r: r.check_name)


def cmd_verify(cfg: RunConfig, suite: str) -> tuple[str, int]:
    p = cfg.params
    reports = run_suite(p, suite, cfg.policy, cfg.seed)
    rows = []
    for r in reports:
        d = r.to_dict()
        d.pop("runtime_ms")  # keep reports byte-identical between runs
        if not math.isfinite(d["tolerance"]):
            d["tolerance"] = None
        rows.append(d)
    failed = [r.check_name for r in reports if not r.passed]
    meta = _meta(p, suite=suite, checks=len(reports), failed=failed)
    cols = ["check_name", "measured", "tolerance", "passed", "flagged", "params_digest", "note"]
    text = render(meta, rows, cfg.output_format, cols)
    if failed:
        print("failed checks: " + ", ".join(failed), file=sys.stderr)
        return text, EXIT_FAIL
    return text, EXIT_OK


# ---------------------------------------------------------------------------
# reconstruct
# ---------------------------------------------------------------------------


def parse_signal(descriptor: str, p: PulseParams, seed: int):
    from .sampling import GaussianComponent, GaussianMixture, phi_descriptor

    def component(text: str) -> GaussianComponent:
        parts = text.split(",")
        if len(parts) != 3:
            raise UsageError(f"component {text!r} must be amplitude,center,width")
        try:
            return GaussianComponent(*(float(v) for v in parts))
        except ValueError as exc:
            raise UsageError(str(exc)) from exc

    if descriptor == "phi":
        return phi_descriptor(p)
    if descriptor == "zero":
        return GaussianMixture(())
    if descriptor == "random-mixture":
        return GaussianMixture.random(3, p, seed)
    kind, _, body = descriptor.partition(":")
    if kind == "gaussian" and body:
        return GaussianMixture((component(body),))
    if kind == "mixture" and body:
        return GaussianMixture(tuple(component(c) for c in body.split(";") if c))
    raise UsageError(f"unknown signal descriptor {descriptor!r}")


def cmd_reconstruct(cfg: RunConfig, signal: str, offset: float | None) -> tuple[str, int]:
    from .pulse_shapes import _offset_window
    from .sampling import offset_reconstruct, run_pipeline

    p = cfg.params
    f = parse_signal(signal, p, cfg.seed)
    x = cfg.grid(-6 * p.lam, p.lam / 16, 193)
    if x.size < 2:
        raise UsageError("reconstruction needs at least two grid points")
    res = run_pipeline(f, p, x, offset=0.0 if offset is None else offset, policy=cfg.policy)
    extra = {
        "signal": signal,
        "energy": res.energy_f,
        "error_sup": res.error_sup,
        "bound": res.bound,
        "passed": res.passed,
        "interpolation_error": res.interpolation_error,
    }
    rows = [{"x": float(a), "g_tilde": float(b)} for a, b in zip(x, res.g_tilde.values)]
    if offset is not None:
        # the phi_int,a path: f itself from its samples on a + n lam
        reach = int(np.max(np.abs(_offset_window(offset, p, 1e-16)))) + 40
        n = np.arange(math.floor(x.min() / p.lam) - reach, math.ceil(x.max() / p.lam) + reach + 1)
        from .params import SampledSignal

        fs = SampledSignal(float(offset + n[0] * p.lam), p.lam, f(offset + n * p.lam))
        rec = offset_reconstruct(fs, offset, p, x, cfg.policy).values
        extra["offset"] = offset
        extra["offset_error_sup"] = float(np.max(np.abs(rec - f(x))))
        for row, v in zip(rows, rec):
            row["f_offset"] = float(v)
    samples = [{"x": float(a), "g": float(b)} for a, b in zip(res.g_samples.grid, res.g_samples.values)]
    extra["g_samples"] = samples
    meta = _meta(p, **extra)
    cols = ["x", "g_tilde"] + (["f_offset"] if offset is not None else [])
    text = render(meta, rows, cfg.output_format, cols)
    return text, EXIT_OK if res.passed else EXIT_FAIL


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--beta", type=float, default=1.0)
    common.add_argument("--lambda", dest="lam", type=float, default=1.0)
    common.add_argument("--start", type=float, default=None, help="first grid point")
    common.add_argument("--step", type=float, default=None, help="grid spacing")
    common.add_argument("--count", type=int, default=None, help="number of grid points")
    common.add_argument("--rel-tol", type=float, default=1e-16)
    common.add_argument("--format", dest="fmt", choices=("json", "csv"), default="json")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--output", "-o", default=None, help="write here instead of stdout")
    common.add_argument("--inject-nome", type=float, default=None, help=argparse.SUPPRESS)

    parser = _Parser(prog="gausspulse", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    sp = sub.add_parser("pulse", parents=[common], help="sample a pulse on a grid")
    sp.add_argument("--which", choices=PULSES, required=True)
    sf = sub.add_parser("filter", parents=[common], help="export filter coefficients")
    sf.add_argument("--which", choices=FILTERS, required=True)
    sf.add_argument("--order", type=int, default=10)
    sv = sub.add_parser("verify", parents=[common], help="run oracle checks")
    sv.add_argument("--suite", choices=SUITES, default="all")
    sr = sub.add_parser("reconstruct", parents=[common], help="prefilter, sample and reconstruct")
    sr.add_argument("--signal", default="phi",
                    help="phi | zero | random-mixture | gaussian:A,c,s | mixture:A,c,s;A,c,s")
    sr.add_argument("--offset", type=float, default=None, help="also reconstruct f from f(a + n lam)")
    return parser


def main(argv: list[str] | None = None) -> int:
    # oracles imports no closed forms, so this keeps the identities suite isolated
    from .oracles import GridTooCoarse

    try:
        args = build_parser().parse_args(argv)
        if args.inject_nome is not None:
            # test hook: a corrupted nome must be rejected at construction
            Nome(args.inject_nome)
        try:
            cfg = RunConfig(args.beta, args.lam, getattr(args, "order", 10), args.start, args.step,
                            args.count, args.rel_tol, args.fmt, args.seed)
            p = cfg.params
        except ValueError as exc:
            raise UsageError(str(exc)) from exc
        if not p.in_supported_region() and args.command != "pulse":
            print(f"warning: lambda*beta = {p.lam_beta:g} is outside [0.2, 5]; accuracy claims may not hold",
                  file=sys.stderr)
        if args.command == "pulse":
            text, code = cmd_pulse(cfg, args.which)
        elif args.command == "filter":
            text, code = cmd_filter(cfg, args.which)
        elif args.command == "verify":
            text, code = cmd_verify(cfg, args.suite)
        else:
            text, code = cmd_reconstruct(cfg, args.signal, args.offset)
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ArithmeticError, GridTooCoarse) as exc:  # truncation, quadrature, oracle, non-finite
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    _emit(text, args.output)
    return code


if __name__ == "__main__":
    sys.exit(main())
