"""Plain-text and TSV renderers for experiment results."""
from __future__ import annotations

from typing import Sequence

import numpy as np

from .arima import ArimaFit, arima_report
from .backtest import UniverseComparison, round_half_even
from .econometrics import AdfResult, DistributionStats, RandomWalkScreen
from .ml.features import LABELS
from .ml.selection import ConfusionMatrix


def tsv(header: Sequence[str], rows) -> str:
    lines = ["\t".join(str(h) for h in header)]
    lines += ["\t".join(str(v) for v in row) for row in rows]
    return "\n".join(lines) + "\n"


RANDOM_BETTER_HEADER = ("Test No.", "|Ω|", "mean R_Ω", "n", "k", "% ω better than Ω", "Result")
SMA_BETTER_HEADER = ("|Ω|", "mean R_Ω", "mean R_SMA", "mean R_Random", "n", "r", "% ω better", "Response")


def render_random_better(comparisons: Sequence[UniverseComparison]) -> str:
    """One row per random-portfolio run; returns shown as rounded integers."""
    rows = []
    for i, c in enumerate(comparisons, start=1):
        rows.append((i, c.universe_size, round_half_even(c.averages["hold"]), c.params["n_iter"],
                     c.params["k"], f"{c.pct_better}%", c.verdict))
    return tsv(RANDOM_BETTER_HEADER, rows)


def render_sma_better(c: UniverseComparison) -> str:
    a = c.averages
    row = (c.universe_size, round_half_even(a["hold"]), round_half_even(a["sma"]), round_half_even(a["random"]),
           c.params["n"], c.params["r"], f"{c.pct_better:.2f}", c.verdict)
    return tsv(SMA_BETTER_HEADER, [row])


def render_per_asset(c: UniverseComparison) -> str:
    keys = [k for k in ("hold", "sma", "random") if c.per_asset and k in c.per_asset[0]]
    rows = []
    for r in c.per_asset:
        row = [r["symbol"]] + [repr(float(r[k])) for k in keys]
        if "better" in r:
            row.append(r["better"])
        rows.append(row)
    header = ["symbol"] + keys + (["better"] if c.per_asset and "better" in c.per_asset[0] else [])
    return tsv(header, rows)


def render_adf(screen: RandomWalkScreen) -> str:
    rows = []
    for sym, r in screen.results.items():
        rows.append((sym, f"{r.test_statistic:.4f}", f"{r.p_value:.4f}", r.lags_used, r.n_obs,
                     "yes" if r.p_value > 0.05 else "no", "clamped" if r.p_clamped else ""))
    for sym, reason in screen.skipped.items():
        rows.append((sym, "", "", "", "", "skipped", reason))
    body = tsv(("symbol", "adf_stat", "p_value", "lags", "n_obs", "random_walk", "note"), rows)
    return body + f"# random-walk share: {round_half_even(screen.share_pct)}%\n"


def render_adf_result(r: AdfResult) -> str:
    lines = [f"ADF statistic\t{r.test_statistic:.4f}", f"p-value\t{r.p_value:.4f}",
             f"lags used\t{r.lags_used}", f"observations\t{r.n_obs}"]
    lines += [f"critical {k}\t{v:.4f}" for k, v in r.critical_values.items()]
    return "\n".join(lines) + "\n"


def render_confusion(cm: ConfusionMatrix, symbol: str = "") -> str:
    """3x3 counts with row and column totals; rows are true labels."""
    head = f"{symbol} true\\pred" if symbol else "true\\pred"
    rows = []
    for lab, row in zip(LABELS, cm.counts.tolist()):
        rows.append([lab] + row + [sum(row)])
    cols = cm.counts.sum(axis=0).tolist()
    rows.append(["total"] + cols + [cm.total])
    out = tsv([head, -1, 0, 1, "total"], rows)
    return out + f"accuracy\t{cm.accuracy:.4f}\n"


def render_distribution(d: DistributionStats) -> str:
    rows = [("n", d.n), ("mean", f"{d.mean:.6f}"), ("std", f"{d.std:.6f}"),
            ("skewness", f"{d.skewness:.6f}"), ("excess_kurtosis", f"{d.excess_kurtosis:.6f}"),
            ("jarque_bera", f"{d.jarque_bera_stat:.6f}"), ("jb_p_value", f"{d.jb_p_value:.6g}")]
    return tsv(("statistic", "value"), rows)


def render_histogram(d: DistributionStats) -> str:
    e = d.hist_edges
    rows = [(repr(float(e[i])), repr(float(e[i + 1])), int(d.hist_counts[i])) for i in range(len(d.hist_counts))]
    return tsv(("left", "right", "count"), rows).replace("\t", ",")


def render_table(obj) -> str:
    """Dispatch on the result type."""
    if isinstance(obj, ArimaFit):
        return arima_report(obj)
    if isinstance(obj, ConfusionMatrix):
        return render_confusion(obj)
    if isinstance(obj, RandomWalkScreen):
        return render_adf(obj)
    if isinstance(obj, AdfResult):
        return render_adf_result(obj)
    if isinstance(obj, DistributionStats):
        return render_distribution(obj)
    if isinstance(obj, UniverseComparison):
        return render_sma_better(obj) if obj.experiment == "isSMABetter" else render_random_better([obj])
    if isinstance(obj, (list, tuple)) and obj and isinstance(obj[0], UniverseComparison):
        return render_random_better(obj)
    raise TypeError(f"nothing to render for {type(obj).__name__}")


def paths_csv(paths: np.ndarray, dt: float) -> str:
    """Wide CSV: one row per time step, one column per path."""
    n_paths, n_steps = paths.shape
    lines = ["t," + ",".join(f"path{i}" for i in range(n_paths))]
    for j in range(n_steps):
        lines.append(repr(round(j * dt, 12)) + "," + ",".join(repr(float(v)) for v in paths[:, j]))
    return "\n".join(lines) + "\n"
