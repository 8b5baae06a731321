"""Canned parameter grids for the three reference figures.

CSV files are the canonical output; PNG images are rendered only when a
plotting backend is importable. Figure 1 sweeps the Kerr strength and the
drive on a 3x3 grid and needs tighter integrator tolerances than the
defaults: the weak-drive cells push the SLD solve against its rank cutoff,
and looser integration inflates the residual there. Figures 2 and 3 share
one underlying sweep (both Fisher-information columns come from the same
runs) and differ only in which parameter's curves get plotted.
"""

import os

from .fock import ModelParams
from .scenario import (PropagationSettings, ScenarioConfig, SweepAxis,
                       emit_csv, run_scenario, scenario_id)

try:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
except ImportError:  # plotting is optional; CSV output is canonical
    plt = None

FIGURES = ("fig1", "fig2", "fig3")

FIG1_CHIS = (0.1, 0.5, 1.0)
FIG1_DRIVES = (0.01, 0.1, 1.0)
FIG23_CHI = 0.05
FIG23_DRIVES = (0.1, 0.15, 0.2)
LOSS_RATE = 0.01


def fig1_configs():
    """One f-sweep per Kerr strength; 9 points total, gamma = 0.01."""
    settings = PropagationSettings(t_max=100.0, n_times=201,
                                   rel_tol=1e-11, abs_tol=1e-13)
    return [
        ScenarioConfig(
            params=ModelParams(chi=chi, gamma=LOSS_RATE),
            propagation=settings,
            thetas=(0.0,),
            outputs=("qfim", "uhlmann", "homodyne-fi"),
            sweep=SweepAxis(parameter="f", values=FIG1_DRIVES),
        )
        for chi in FIG1_CHIS
    ]


def fig23_config():
    """Shared sweep behind figures 2 and 3: chi = 0.05, three drives."""
    return ScenarioConfig(
        params=ModelParams(chi=FIG23_CHI, gamma=LOSS_RATE),
        propagation=PropagationSettings(t_max=100.0, n_times=401),
        thetas=(0.0,),
        outputs=("qfim", "uhlmann", "homodyne-fi"),
        sweep=SweepAxis(parameter="f", values=FIG23_DRIVES),
    )


def _rows_by_id(rows):
    table = {}
    for row in rows:
        table.setdefault(row.scenario_id, []).append(row)
    return table


def _sid(chi, f):
    return scenario_id(ModelParams(chi=chi, gamma=LOSS_RATE, drive_f=f), 0.0)


def _plot_fig1(rows, path):
    table = _rows_by_id(rows)
    cols = (("f_chichi", r"$\mathcal{F}_{\chi\chi}$", "log"),
            ("f_gammagamma", r"$\mathcal{F}_{\gamma\gamma}$", "log"),
            ("f_chigamma", r"$\mathcal{F}_{\chi\gamma}$", "linear"))
    fig, axes = plt.subplots(3, 3, figsize=(11, 9), sharex=True)
    for i, chi in enumerate(FIG1_CHIS):
        for j, (field, label, scale) in enumerate(cols):
            ax = axes[i][j]
            for f in FIG1_DRIVES:
                series = table[_sid(chi, f)]
                ts = [r.t for r in series]
                ys = [getattr(r, field) for r in series]
                if scale == "log":
                    # drop the t=0 zero so the log axis stays finite
                    pairs = [(t, y) for t, y in zip(ts, ys) if y and y > 0]
                    ts = [t for t, _ in pairs]
                    ys = [y for _, y in pairs]
                ax.plot(ts, ys, label=f"F={f:g}")
            ax.set_yscale(scale)
            if i == 0:
                ax.set_title(label)
            if i == 2:
                ax.set_xlabel(r"$\Delta t$")
            if j == 0:
                ax.set_ylabel(f"chi={chi:g}")
    axes[0][0].legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def _plot_fig23(rows, path, which):
    cfi_field = "cfi_chi" if which == "chi" else "cfi_gamma"
    qfi_field = "f_chichi" if which == "chi" else "f_gammagamma"
    ratio_field = "ratio_chi" if which == "chi" else "ratio_gamma"
    table = _rows_by_id(rows)
    fig, axes = plt.subplots(2, 3, figsize=(11, 6), sharex=True)
    for j, f in enumerate(FIG23_DRIVES):
        series = table[_sid(FIG23_CHI, f)]
        ts = [r.t for r in series]
        axes[0][j].plot(ts, [getattr(r, cfi_field) for r in series],
                        label=r"$\mathcal{F}_X$")
        axes[0][j].plot(ts, [getattr(r, qfi_field) for r in series],
                        "--", label="QFI")
        axes[0][j].set_title(f"F={f:g}")
        axes[0][j].legend(fontsize=8)
        axes[1][j].plot(ts, [getattr(r, ratio_field) for r in series])
        axes[1][j].set_ylim(0, 1.05)
        axes[1][j].set_xlabel(r"$\Delta t$")
    axes[0][0].set_ylabel("Fisher information")
    axes[1][0].set_ylabel("ratio to QFI")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def reproduce_figure(which, outdir, jobs=None):
    """Run the preset grid for one figure; emit CSV (+ PNG when possible).

    Returns the list of paths written.
    """
    if which not in FIGURES:
        raise ValueError(f"unknown figure {which!r}; expected one of {FIGURES}")
    os.makedirs(outdir, exist_ok=True)
    written = []

    if which == "fig1":
        rows = []
        for cfg in fig1_configs():
            rows.extend(run_scenario(cfg, jobs=jobs))
        written.append(emit_csv(rows, os.path.join(outdir, "fig1.csv")))
        if plt is not None:
            written.append(_plot_fig1(rows, os.path.join(outdir, "fig1.png")))
    else:
        rows = run_scenario(fig23_config(), jobs=jobs)
        written.append(emit_csv(rows, os.path.join(outdir, f"{which}.csv")))
        if plt is not None:
            param = "chi" if which == "fig2" else "gamma"
            written.append(_plot_fig23(
                rows, os.path.join(outdir, f"{which}.png"), param))
    return written
