"""Scenario configuration, sweep execution, and CSV emission.

A scenario is one model-parameter point (or a one-axis sweep of points)
propagated over a time grid, with requested products computed at every
output time: QFIM entries, Uhlmann curvature, homodyne Fisher information
per local-oscillator phase, Cramer-Rao bounds, and final-time outcome
distributions. Rows carry every column always; columns whose product was
not requested stay empty in the CSV.
"""

import configparser
import csv
import os
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, fields, replace

import numpy as np

from .errors import (ConfigError, RankDeficiencyWarning, SingularQfimError,
                     TruncationOverflowError)
from .estimation import EPS_SLD, crb_report, qfim, sld_pair
from .fock import ModelParams
from .homodyne import (classical_fi, default_grid, homodyne_distribution,
                       quadrature_wavefunctions)
from .propagator import (DEFAULT_ABS_TOL, DEFAULT_REL_TOL,
                         DEFAULT_TAIL_THRESHOLD, PropagationConfig,
                         default_dim, propagate_extended, tail_population)

PRODUCTS = ("qfim", "uhlmann", "bounds", "homodyne-fi", "distributions")
SWEEPABLE = ("delta", "chi", "gamma", "f")

# config key -> ModelParams field
_MODEL_KEYS = {"delta": "delta", "chi": "chi", "gamma": "gamma",
               "f": "drive_f"}


@dataclass(frozen=True)
class PropagationSettings:
    """Propagation knobs before the truncation is pinned.

    dim=None defers to the drive-dependent default, resolved per sweep
    point (a drive sweep can straddle the small/large-truncation split).
    """

    dim: int = None
    t_max: float = 100.0
    n_times: int = 201
    rel_tol: float = DEFAULT_REL_TOL
    abs_tol: float = DEFAULT_ABS_TOL
    tail_threshold: float = DEFAULT_TAIL_THRESHOLD

    def __post_init__(self):
        if self.dim is not None and (int(self.dim) != self.dim or self.dim < 2):
            raise ValueError(f"dim must be an integer >= 2, got {self.dim!r}")
        if not self.t_max > 0:
            raise ValueError("t_max must be > 0")
        if int(self.n_times) != self.n_times or self.n_times < 2:
            raise ValueError("n_times must be an integer >= 2")
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise ValueError("tolerances must be positive")
        if not self.tail_threshold > 0:
            raise ValueError("tail_threshold must be positive")

    def t_grid(self):
        return np.linspace(0.0, self.t_max, int(self.n_times))

    def resolve(self, params):
        """Concrete PropagationConfig for one parameter point."""
        dim = int(self.dim) if self.dim is not None else default_dim(params)
        return PropagationConfig(dim=dim, t_grid=self.t_grid(),
                                 rel_tol=self.rel_tol, abs_tol=self.abs_tol,
                                 tail_threshold=self.tail_threshold)


@dataclass(frozen=True)
class SweepAxis:
    parameter: str
    values: tuple

    def __post_init__(self):
        if self.parameter not in SWEEPABLE:
            raise ValueError(
                f"sweep parameter must be one of {SWEEPABLE}, "
                f"got {self.parameter!r}")
        vals = tuple(float(v) for v in self.values)
        if not vals:
            raise ValueError("sweep values must be nonempty")
        if not all(np.isfinite(v) for v in vals):
            raise ValueError("sweep values must be finite")
        object.__setattr__(self, "values", vals)


@dataclass(frozen=True)
class ScenarioConfig:
    params: ModelParams
    propagation: PropagationSettings
    thetas: tuple = (0.0,)
    outputs: tuple = ("qfim", "uhlmann", "homodyne-fi")
    sweep: SweepAxis = None

    def __post_init__(self):
        thetas = tuple(float(t) for t in self.thetas)
        if not thetas or not all(np.isfinite(t) for t in thetas):
            raise ValueError("thetas must be a nonempty list of finite phases")
        object.__setattr__(self, "thetas", thetas)
        outs = tuple(self.outputs)
        if not outs:
            raise ValueError("requested products must be nonempty")
        for o in outs:
            if o not in PRODUCTS:
                raise ValueError(
                    f"unknown product {o!r}; expected one of {PRODUCTS}")
        object.__setattr__(self, "outputs", outs)
        # sweeping must yield valid parameter points; fail when configured,
        # not hours into a run
        for p in self.points():
            self.propagation.resolve(p)

    def points(self):
        """Model-parameter points in sweep order ([params] when no sweep)."""
        if self.sweep is None:
            return [self.params]
        field_name = _MODEL_KEYS[self.sweep.parameter]
        return [replace(self.params, **{field_name: v})
                for v in self.sweep.values]


@dataclass(frozen=True)
class ResultRow:
    scenario_id: str
    t: float
    f_chichi: float = None
    f_gammagamma: float = None
    f_chigamma: float = None
    u_chigamma: float = None
    cfi_chi: float = None
    cfi_gamma: float = None
    ratio_chi: float = None
    ratio_gamma: float = None
    tail_population: float = None


CSV_FIELDS = tuple(f.name for f in fields(ResultRow))


def scenario_id(params, theta):
    """Stable row key: the physical point and the LO phase."""
    return (f"chi{params.chi:g}_gamma{params.gamma:g}"
            f"_F{params.drive_f:g}_theta{theta:g}")


def _parse_floats(text, what):
    vals = []
    for tok in text.split(","):
        tok = tok.strip()
        if not tok:
            continue
        try:
            vals.append(float(tok))
        except ValueError:
            raise ConfigError(f"{what}: cannot parse {tok!r} as a number") from None
    if not vals:
        raise ConfigError(f"{what}: empty value list")
    return vals


def _get_float(section, key, default, what):
    raw = section.get(key)
    if raw is None:
        return default
    try:
        return float(raw)
    except ValueError:
        raise ConfigError(f"{what}.{key}: cannot parse {raw!r} as a number") from None


_SECTION_KEYS = {
    "model": {"delta", "chi", "gamma", "f", "theta"},
    "propagation": {"dim", "t_max", "n_times", "rel_tol", "abs_tol",
                    "tail_threshold"},
    "outputs": {"products"},
    "sweep": {"parameter", "values"},
}


def load_config(path):
    """Parse a sectioned key-value file into a validated ScenarioConfig.

    Grammar (all sections and keys optional except sweep's two keys when
    the section is present; unknown names are rejected):

        [model]        delta chi gamma f theta
        [propagation]  dim t_max n_times rel_tol abs_tol tail_threshold
        [outputs]      products
        [sweep]        parameter values

    All rates are in units of the detuning; delta defaults to 1.
    """
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        with open(path, encoding="utf-8") as fh:
            parser.read_file(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path!r}: {exc}") from None
    except configparser.Error as exc:
        # configparser reports the offending line number in its message
        raise ConfigError(f"config parse error: {exc}") from None

    for section in parser.sections():
        if section not in _SECTION_KEYS:
            raise ConfigError(f"unknown section [{section}]")
        for key in parser[section]:
            if key not in _SECTION_KEYS[section]:
                raise ConfigError(f"unknown key {key!r} in [{section}]")

    model = parser["model"] if parser.has_section("model") else {}
    kwargs = {}
    for key, field_name in _MODEL_KEYS.items():
        raw = model.get(key)
        if raw is not None:
            try:
                kwargs[field_name] = float(raw)
            except ValueError:
                raise ConfigError(
                    f"model.{key}: cannot parse {raw!r} as a number") from None
    try:
        params = ModelParams(**kwargs)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None

    thetas = (0.0,)
    if model.get("theta") is not None:
        thetas = tuple(_parse_floats(model["theta"], "model.theta"))

    prop = parser["propagation"] if parser.has_section("propagation") else {}
    dim = None
    if prop.get("dim") is not None:
        try:
            dim = int(prop["dim"])
        except ValueError:
            raise ConfigError(
                f"propagation.dim: cannot parse {prop['dim']!r} "
                "as an integer") from None
    n_times = 201
    if prop.get("n_times") is not None:
        try:
            n_times = int(prop["n_times"])
        except ValueError:
            raise ConfigError(
                f"propagation.n_times: cannot parse {prop['n_times']!r} "
                "as an integer") from None
    try:
        settings = PropagationSettings(
            dim=dim,
            t_max=_get_float(prop, "t_max", 100.0, "propagation"),
            n_times=n_times,
            rel_tol=_get_float(prop, "rel_tol", DEFAULT_REL_TOL, "propagation"),
            abs_tol=_get_float(prop, "abs_tol", DEFAULT_ABS_TOL, "propagation"),
            tail_threshold=_get_float(prop, "tail_threshold",
                                      DEFAULT_TAIL_THRESHOLD, "propagation"),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from None

    outputs = ("qfim", "uhlmann", "homodyne-fi")
    if parser.has_section("outputs") and parser["outputs"].get("products"):
        outputs = tuple(tok.strip()
                        for tok in parser["outputs"]["products"].split(",")
                        if tok.strip())

    sweep = None
    if parser.has_section("sweep"):
        sec = parser["sweep"]
        if sec.get("parameter") is None or sec.get("values") is None:
            raise ConfigError("[sweep] requires both 'parameter' and 'values'")
        try:
            sweep = SweepAxis(parameter=sec["parameter"].strip(),
                              values=tuple(_parse_floats(sec["values"],
                                                         "sweep.values")))
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    try:
        return ScenarioConfig(params=params, propagation=settings,
                              thetas=thetas, outputs=outputs, sweep=sweep)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


@dataclass(frozen=True)
class PointResult:
    """Rows for one sweep point, plus the final state when distributions
    were requested (kept so the CSV writer need not re-propagate)."""

    params: ModelParams
    rows: tuple
    final_state: object = None


def run_point(params, settings, thetas, outputs):
    """All requested products for a single model-parameter point."""
    cfg = settings.resolve(params)
    want_qfim = "qfim" in outputs or "uhlmann" in outputs or "bounds" in outputs
    want_cfi = "homodyne-fi" in outputs

    try:
        states = propagate_extended(params, cfg)
    except TruncationOverflowError as exc:
        raise TruncationOverflowError(
            exc.time, exc.tail_population, exc.threshold,
            scenario=scenario_id(params, thetas[0])) from None

    psi = grid = None
    if want_cfi or "distributions" in outputs:
        grid = default_grid(cfg.dim)
        psi = quadrature_wavefunctions(cfg.dim, grid)

    rows = []
    worst_resid, worst_t, n_bad = 0.0, 0.0, 0
    for state in states:
        tail = tail_population(state.rho)
        q = None
        if want_qfim:
            # per-time residual warnings are aggregated into one summary
            # below; the residual values stay available via sld_pair
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", RankDeficiencyWarning)
                pair = sld_pair(state)
            resid = max(pair.residual_chi, pair.residual_gamma)
            if resid > EPS_SLD:
                n_bad += 1
                if resid > worst_resid:
                    worst_resid, worst_t = resid, state.time
            q = qfim(state.rho, pair, time=state.time)
        for theta in thetas:
            row = {"scenario_id": scenario_id(params, theta),
                   "t": state.time, "tail_population": tail}
            if q is not None and "qfim" in outputs:
                row.update(f_chichi=q.f_chichi, f_gammagamma=q.f_gammagamma,
                           f_chigamma=q.f_chigamma)
            if q is not None and "uhlmann" in outputs:
                row["u_chigamma"] = q.u_chigamma
            if want_cfi:
                dist = homodyne_distribution(state, theta, grid, psi=psi)
                cfi_c = classical_fi(dist, "chi")
                cfi_g = classical_fi(dist, "gamma")
                row.update(cfi_chi=cfi_c, cfi_gamma=cfi_g)
                # ratios only where the quantum reference exists and is
                # nonzero (t=0 has an all-zero QFIM)
                if q is not None and "qfim" in outputs:
                    if q.f_chichi > 0:
                        row["ratio_chi"] = cfi_c / q.f_chichi
                    if q.f_gammagamma > 0:
                        row["ratio_gamma"] = cfi_g / q.f_gammagamma
            rows.append(ResultRow(**row))

    if n_bad:
        warnings.warn(
            f"scenario {scenario_id(params, thetas[0])}: SLD residual above "
            f"{EPS_SLD:.0e} at {n_bad}/{len(states)} output times "
            f"(max {worst_resid:.3e} at t={worst_t:g}); near-pure states at "
            "weak drive leave part of the derivative below the rank cutoff",
            RankDeficiencyWarning, stacklevel=2)

    final = states[-1] if "distributions" in outputs else None
    return PointResult(params=params, rows=tuple(rows), final_state=final)


def _run_point_task(args):
    return run_point(*args)


def run_point_results(cfg, jobs=None):
    """PointResult per sweep point, computed serially or across a pool."""
    tasks = [(p, cfg.propagation, cfg.thetas, cfg.outputs)
             for p in cfg.points()]
    if jobs is None:
        jobs = os.cpu_count() or 1
    jobs = max(1, min(int(jobs), len(tasks)))
    if jobs == 1:
        return [run_point(*t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        futures = [pool.submit(_run_point_task, t) for t in tasks]
        # collect in submission order so output is deterministic
        return [f.result() for f in futures]


def run_scenario(cfg, jobs=None):
    """One ResultRow per (sweep point, output time, LO phase)."""
    rows = []
    for pr in run_point_results(cfg, jobs=jobs):
        rows.extend(pr.rows)
    return rows


def _format(value):
    if value is None:
        return ""
    return f"{value:.17g}"


def emit_csv(rows, path):
    """Write rows with the exact ResultRow header and round-trip floats."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_FIELDS)
        for row in rows:
            writer.writerow([row.scenario_id]
                            + [_format(getattr(row, name))
                               for name in CSV_FIELDS[1:]])
    return path


BOUNDS_FIELDS = ("scenario_id", "t", "m_repetitions", "scalar_bound",
                 "var_bound_chi", "var_bound_gamma")


def emit_bounds_csv(rows, path, m=1):
    """Cramer-Rao bound table derived from already-computed QFIM rows.

    Times where the QFIM is singular (always t=0, where no information has
    accumulated) are skipped rather than written with sentinel values.
    """
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(BOUNDS_FIELDS)
        for row in rows:
            if row.f_chichi is None:
                continue
            q = _QfimView(row)
            try:
                rep = crb_report(q, m)
            except SingularQfimError:
                continue
            writer.writerow([row.scenario_id, _format(row.t), str(m),
                             _format(rep.scalar_bound),
                             _format(rep.var_bound_chi),
                             _format(rep.var_bound_gamma)])
    return path


class _QfimView:
    """Adapter giving crb_report the three entries it reads from a row."""

    def __init__(self, row):
        self.f_chichi = row.f_chichi
        self.f_gammagamma = row.f_gammagamma
        self.f_chigamma = row.f_chigamma


DIST_FIELDS = ("x", "p", "dp_chi", "dp_gamma")


def emit_distribution_csv(point_result, theta, path):
    """Final-time homodyne outcome density and exact derivative densities."""
    state = point_result.final_state
    if state is None:
        raise ValueError("point was run without the distributions product")
    dim = state.rho.shape[0]
    grid = default_grid(dim)
    dist = homodyne_distribution(state, theta, grid)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(DIST_FIELDS)
        for k in range(grid.points.size):
            writer.writerow([_format(grid.points[k]), _format(dist.p[k]),
                             _format(dist.dp_chi[k]),
                             _format(dist.dp_gamma[k])])
    return path
