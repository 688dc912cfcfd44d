"""Command-line interface.

Subcommands: ``spectrum`` (chain point spectra), ``simulate`` (five-mode
trajectories), ``homoclinic`` (closed-form orbit sampling and residual
checks), ``darboux`` (gauge-transform verification), and ``jacobi``
(bracket identity residuals).  Outputs are JSON or CSV; identical flags
and seed produce identical bytes.  Output files are written atomically
(write to a temporary name, then rename).  EULER_LAB_THREADS caps the
process fan-out when ``spectrum`` is given several --khat values.

Exit codes: 0 ok, 2 usage error, 3 root-finder non-convergence (the
report is still written, with the unresolved seeds), 4 a residual or
invariant-drift threshold was exceeded.
"""

from __future__ import annotations

import argparse
import json
import os
import re
import sys
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import fields, models, ode, spectra


class _Parser(argparse.ArgumentParser):
    """ArgumentParser that accepts vector values like ``-3,-2``."""

    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        self._negative_number_matcher = re.compile(r"^-\d+(?:,-?\d+)?$|^-\d*\.\d+$")

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NO_CONVERGENCE = 3
EXIT_VERIFICATION = 4

RESIDUAL_THRESHOLD = 1e-8
JACOBI_THRESHOLD = 1e-10


@dataclass(frozen=True)
class RunConfig:
    """Resolved parameters of one invocation, echoed into JSON outputs."""

    command: str
    params: dict
    output: str | None
    format: str
    seed: int | None = None

    def as_dict(self) -> dict:
        doc = {"command": self.command, "params": self.params, "format": self.format}
        if self.seed is not None:
            doc["seed"] = self.seed
        return doc


def _parse_vec(text: str) -> tuple[int, int]:
    try:
        a, b = text.split(",")
        return int(a), int(b)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected 'k1,k2', got {text!r}") from exc


def _write_atomic(path: str, data: str) -> None:
    target = Path(path)
    fd, tmp = tempfile.mkstemp(dir=target.parent or Path("."), prefix=target.name)
    try:
        with os.fdopen(fd, "w") as handle:
            handle.write(data)
        os.replace(tmp, target)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _emit(doc: dict, output: str | None) -> None:
    text = json.dumps(doc, sort_keys=True, indent=2) + "\n"
    if output:
        _write_atomic(output, text)
    else:
        sys.stdout.write(text)


def _thread_cap(n_jobs: int) -> int:
    env = os.environ.get("EULER_LAB_THREADS")
    cap = int(env) if env else (os.cpu_count() or 1)
    return max(1, min(n_jobs, cap))


def _spectrum_one(args_tuple) -> dict:
    khat, p, gamma, convention, method, truncation_n, depth, junction, tol = args_tuple
    chain = spectra.ClassChain(khat, p, gamma, spectra.Convention(convention))
    if method == "cf":
        report = spectra.point_spectrum(chain, tol, depth=depth, junction=junction)
    else:
        report = spectra.truncated_eigenvalues(chain, truncation_n)
    doc = report.as_dict()
    doc["khat"] = list(khat)
    doc["p"] = list(p)
    doc["gamma"] = gamma
    scale = abs(gamma) if gamma else 1.0
    doc["two_lambda_over_gamma"] = [
        {"re": 2.0 * ev.real / scale, "im": 2.0 * ev.imag / scale} for ev in report.eigenvalues
    ]
    doc["n_unresolved"] = len(report.unresolved)
    return doc


def _cmd_spectrum(args) -> int:
    jobs = [
        (khat, args.p, args.gamma, args.convention, args.method,
         args.truncation_n, args.cf_depth, args.cf_junction, args.tol)
        for khat in args.khat
    ]
    if len(jobs) > 1 and _thread_cap(len(jobs)) > 1:
        with ProcessPoolExecutor(max_workers=_thread_cap(len(jobs))) as pool:
            reports = list(pool.map(_spectrum_one, jobs))
    else:
        reports = [_spectrum_one(job) for job in jobs]

    config = RunConfig(
        "spectrum",
        {
            "p": list(args.p),
            "khat": [list(k) for k in args.khat],
            "gamma": args.gamma,
            "convention": args.convention,
            "method": args.method,
            "truncation_n": args.truncation_n,
            "cf_depth": args.cf_depth,
            "cf_junction": args.cf_junction,
            "tol": args.tol,
        },
        args.output,
        "json",
    )
    doc = {"config": config.as_dict()}
    doc.update(reports[0] if len(reports) == 1 else {"reports": reports})

    for rep in reports:
        scale = abs(rep["gamma"]) if rep["gamma"] else 1.0
        for ev in rep["eigenvalues"]:
            print(
                f"khat={tuple(rep['khat'])} lambda = {ev['re']:+.14e} {ev['im']:+.14e}i"
                f"   2*lambda/|Gamma| = {2 * ev['re'] / scale:+.14e} {2 * ev['im'] / scale:+.14e}i"
                f"   [{ev['class']}]"
            )
        print(f"khat={tuple(rep['khat'])} band halfwidth = {rep['band']:.14e}")
    _emit(doc, args.output)
    if any(rep["n_unresolved"] for rep in reports):
        return EXIT_NO_CONVERGENCE
    return EXIT_OK


def _load_initial_state(args) -> np.ndarray:
    if (args.ic is None) == (args.fixed_point is None):
        raise ValueError("give exactly one of --ic or --fixed-point")
    if args.fixed_point is not None:
        return models.fixed_point(args.fixed_point).as_array()
    doc = json.loads(Path(args.ic).read_text())
    if isinstance(doc, list):
        values = [float(v) for v in doc]
        if len(values) != 7:
            raise ValueError("initial-state list must have 7 entries")
        return np.array(values)
    return models.FiveModeState(**{k: float(v) for k, v in doc.items()}).as_array()


def _cmd_simulate(args) -> int:
    if args.integrator == "rk4" and args.dt is None:
        raise ValueError("--integrator rk4 requires --dt")
    if args.integrator == "rk45" and args.tol is None:
        raise ValueError("--integrator rk45 requires --tol")
    y0 = _load_initial_state(args)
    trajectory = ode.integrate(
        lambda t, y: models.five_mode_rhs_array(y),
        y0,
        args.t0,
        args.t1,
        dt=args.dt,
        tol=args.tol,
    )
    if args.output:
        import io

        buf = io.StringIO()
        models.write_trajectory_csv(trajectory, buf)
        _write_atomic(args.output, buf.getvalue())
    else:
        models.write_trajectory_csv(trajectory, sys.stdout)

    q = models.invariants_array(trajectory.y.T)
    drift = float(np.max(np.abs(q - q[:, :1])))
    scale = max(float(q[2, 0]), 1e-30)
    print(f"steps = {len(trajectory) - 1}, max invariant drift = {drift:.3e} "
          f"(relative {drift / scale:.3e})", file=sys.stderr)
    if args.max_drift is not None and drift / scale > args.max_drift:
        return EXIT_VERIFICATION
    return EXIT_OK


def _cmd_homoclinic(args) -> int:
    if args.gamma == 0.0:
        raise ValueError("--gamma must be nonzero")
    params = models.HomoclinicParams(
        gamma=args.gamma,
        tau0=args.tau0,
        theta0=args.theta0,
        branch=models.Branch(args.branch),
    )
    tau = np.linspace(args.tau_min, args.tau_max, args.samples)
    t = (tau - args.tau0) / (params.kappa * args.gamma)
    states = np.stack([models.homoclinic_state(ti, params).as_array() for ti in t])
    trajectory = ode.Trajectory(t, states)
    if args.output:
        import io

        buf = io.StringIO()
        models.write_trajectory_csv(trajectory, buf)
        _write_atomic(args.output, buf.getvalue())
    else:
        models.write_trajectory_csv(trajectory, sys.stdout)
    if args.check_residual:
        report = models.orbit_residual(params, tau)
        print(f"max orbit residual = {report.max_residual:.3e} "
              f"(finite-difference backstop {report.fd_max_residual:.3e})", file=sys.stderr)
        if report.max_residual > RESIDUAL_THRESHOLD:
            return EXIT_VERIFICATION
    return EXIT_OK


def _cmd_darboux(args) -> int:
    n = args.grid
    gamma = args.gamma
    eps = args.epsilon
    omega = fields.GridField.from_modes(n, {(1, 1): gamma / 2, (-1, -1): gamma / 2})
    f = omega
    p = fields.GridField(omega.values**2)
    shift = fields.GridField.from_modes(n, {(1, 1): eps / 2, (-1, -1): eps / 2})
    report = fields.darboux_transform(f, p, omega, shift)
    config = RunConfig(
        "darboux",
        {"example": args.example, "gamma": gamma, "epsilon": eps, "grid": n},
        args.output,
        "json",
    )
    doc = {"config": config.as_dict()}
    doc.update(report.as_dict())
    for name, value in report.residuals.items():
        print(f"{name}: {value:.3e}")
    print(f"mask fraction: {report.mask_fraction:.4f}")
    _emit(doc, args.output)
    if report.unreliable or report.max_residual > RESIDUAL_THRESHOLD:
        return EXIT_VERIFICATION
    return EXIT_OK


def random_trig_polynomial(
    n: int, degree: int, rng: np.random.Generator
) -> fields.GridField:
    """Real random field with modes |k1|, |k2| <= degree, unit max-norm."""
    modes = {}
    for k1 in range(-degree, degree + 1):
        for k2 in range(-degree, degree + 1):
            if (k1, k2) == (0, 0) or (k1, k2) in modes:
                continue
            c = complex(rng.standard_normal(), rng.standard_normal())
            modes[(k1, k2)] = c
            modes[(-k1, -k2)] = c.conjugate()
    f = fields.GridField.from_modes(n, modes)
    return fields.GridField(f.values / f.max_norm())


def _cmd_jacobi(args) -> int:
    rng = np.random.default_rng(args.seed)
    residuals = []
    for _ in range(args.trials):
        f, g, h = (random_trig_polynomial(args.grid, args.degree, rng) for _ in range(3))
        residuals.append(fields.jacobi_residual(f, g, h))
    worst = max(residuals)
    config = RunConfig(
        "jacobi",
        {"grid": args.grid, "degree": args.degree, "trials": args.trials},
        args.output,
        "json",
        seed=args.seed,
    )
    doc = {
        "config": config.as_dict(),
        "residuals": residuals,
        "max_residual": worst,
        "threshold": JACOBI_THRESHOLD,
    }
    print(f"max bracket-identity residual over {args.trials} trials: {worst:.3e}")
    _emit(doc, args.output)
    return EXIT_OK if worst < JACOBI_THRESHOLD else EXIT_VERIFICATION


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="euler-lab",
        description="Spectra, finite-mode models, and verification tools for 2D Euler flow.",
    )
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sp = sub.add_parser("spectrum", help="point spectrum of a linearized chain")
    sp.add_argument("--p", type=_parse_vec, required=True, help="pumping mode, e.g. 1,1")
    sp.add_argument("--khat", type=_parse_vec, action="append", required=True,
                    help="class representative, e.g. -3,-2 (repeatable for a sweep)")
    sp.add_argument("--gamma", type=float, default=1.0, help="amplitude Gamma (default 1.0)")
    sp.add_argument("--convention", choices=["formula", "paper-table"], default="formula",
                    help="coefficient normalization (default formula)")
    sp.add_argument("--method", choices=["cf", "truncation"], default="cf",
                    help="continued fraction or dense finite section (default cf)")
    sp.add_argument("--truncation-n", type=int, default=200,
                    help="finite-section half-width (default 200)")
    sp.add_argument("--cf-depth", type=int, default=400,
                    help="continued-fraction recursion depth (default 400)")
    sp.add_argument("--cf-junction", type=int, default=0,
                    help="matching index of the two recurrences (default 0)")
    sp.add_argument("--tol", type=float, default=1e-12,
                    help="root residual tolerance (default 1e-12)")
    sp.add_argument("--output", help="write the JSON report here (default stdout)")
    sp.set_defaults(func=_cmd_spectrum)

    sim = sub.add_parser("simulate", help="integrate the five-mode system")
    sim.add_argument("--model", choices=["five-mode"], default="five-mode")
    sim.add_argument("--ic", help="JSON file with the initial state")
    sim.add_argument("--fixed-point", type=float, dest="fixed_point",
                     help="start at the steady state with this Gamma")
    sim.add_argument("--t0", type=float, default=0.0)
    sim.add_argument("--t1", type=float, required=True)
    sim.add_argument("--dt", type=float, help="fixed RK4 step")
    sim.add_argument("--tol", type=float, help="adaptive RK45 per-step tolerance")
    sim.add_argument("--integrator", choices=["rk4", "rk45"],
                     help="consistency check against --dt / --tol")
    sim.add_argument("--max-drift", type=float, dest="max_drift",
                     help="exit 4 if relative invariant drift exceeds this")
    sim.add_argument("--output", help="trajectory CSV path (default stdout)")
    sim.set_defaults(func=_cmd_simulate)

    hom = sub.add_parser("homoclinic", help="sample and verify a closed-form orbit")
    hom.add_argument("--gamma", type=float, required=True)
    hom.add_argument("--tau0", type=float, default=0.0)
    hom.add_argument("--theta0", type=float, default=0.0)
    hom.add_argument("--branch", choices=["plus", "minus"], default="plus",
                     help="sign branch of kappa (default plus)")
    hom.add_argument("--samples", type=int, default=2001)
    hom.add_argument("--tau-min", type=float, default=-10.0, dest="tau_min")
    hom.add_argument("--tau-max", type=float, default=10.0, dest="tau_max")
    hom.add_argument("--check-residual", action="store_true", dest="check_residual",
                     help="exit 4 if the orbit residual exceeds 1e-8")
    hom.add_argument("--output", help="orbit CSV path (default stdout)")
    hom.set_defaults(func=_cmd_homoclinic)

    dar = sub.add_parser("darboux", help="verify the gauge transform on a worked example")
    dar.add_argument("--example", choices=["cosine"], default="cosine")
    dar.add_argument("--gamma", type=float, default=1.0)
    dar.add_argument("--epsilon", type=float, default=0.1)
    dar.add_argument("--grid", type=int, default=128)
    dar.add_argument("--output", help="JSON report path (default stdout)")
    dar.set_defaults(func=_cmd_darboux)

    jac = sub.add_parser("jacobi", help="bracket identity residuals on random fields")
    jac.add_argument("--grid", type=int, default=128)
    jac.add_argument("--degree", type=int, default=5)
    jac.add_argument("--trials", type=int, default=50)
    jac.add_argument("--seed", type=int, default=42)
    jac.add_argument("--output", help="JSON report path (default stdout)")
    jac.set_defaults(func=_cmd_jacobi)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
