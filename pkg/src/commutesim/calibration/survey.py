"""Survey ingestion, Likert-to-weight conversion and the group-comparison report."""

from __future__ import annotations

import itertools
from pathlib import Path

import numpy as np
import pandas as pd

from ..config import SES_KEYS
from ..types import ATTRIBUTE_KEYS, MODE_KEYS, DataError, Mode, SES
from .inference import chi_square_independence, crosstab, kruskal_wallis, mann_whitney_u

LIKERT_COLUMNS = tuple(f"imp_{k}" for k in ATTRIBUTE_KEYS)
REQUIRED_COLUMNS = ("id", "ses", "sex", "age", "mode") + LIKERT_COLUMNS


def read_survey(path: str | Path) -> pd.DataFrame:
    """Load ``survey.csv`` (one row per respondent, header-named columns)."""
    try:
        df = pd.read_csv(path)
    except (OSError, pd.errors.ParserError) as exc:
        raise DataError(f"cannot read survey {path}: {exc}") from None
    return validate_survey(df)


def validate_survey(df: pd.DataFrame) -> pd.DataFrame:
    missing = [c for c in REQUIRED_COLUMNS if c not in df.columns]
    if missing:
        raise DataError(f"survey is missing columns: {', '.join(missing)}")
    df = df.copy()
    try:
        df["ses"] = [SES_KEYS[SES.parse(v)] for v in df["ses"]]
        df["mode"] = [MODE_KEYS[Mode.parse(v)] for v in df["mode"]]
    except ValueError as exc:
        raise DataError(str(exc)) from None
    for col in LIKERT_COLUMNS:
        vals = pd.to_numeric(df[col], errors="coerce")
        bad = ~vals.isin([1, 2, 3, 4, 5])
        if bad.any():
            row = int(np.flatnonzero(bad.to_numpy())[0])
            raise DataError(f"{col}: Likert value {df[col].iloc[row]!r} at row {row} not in 1..5")
        df[col] = vals.astype(int)
    return df


def normalize_weights(survey: pd.DataFrame) -> dict[str, dict[str, list[float]]]:
    """Per-SES mean and sd of ``likert / 5`` for each attribute.

    Returns ``{"means": {ses: [7 floats]}, "sds": {ses: [7 floats]}}``; the means
    plug straight into ``population.weight_means``. Groups absent from the
    survey are omitted.
    """
    df = validate_survey(survey)
    means, sds = {}, {}
    for ses in SES_KEYS:
        sub = df[df["ses"] == ses]
        if len(sub) == 0:
            continue
        scores = sub[list(LIKERT_COLUMNS)].to_numpy(dtype=float) / 5.0
        means[ses] = scores.mean(axis=0).tolist()
        sds[ses] = (scores.std(axis=0, ddof=1) if len(sub) > 1 else np.zeros(len(LIKERT_COLUMNS))).tolist()
    return {"means": means, "sds": sds}


def compare_groups(survey: pd.DataFrame, by: str = "ses") -> pd.DataFrame:
    """Kruskal-Wallis across groups plus pairwise Mann-Whitney and chi-square per attribute.

    One row per attribute; columns ``kw_H, kw_p`` and, for each pair of groups,
    ``mwu_p_<a>/<b>`` and ``chi2_p_<a>/<b>`` (Likert levels x group table).
    """
    df = validate_survey(survey)
    levels = [g for g in (SES_KEYS if by == "ses" else sorted(df[by].unique())) if (df[by] == g).any()]
    rows = []
    for key, col in zip(ATTRIBUTE_KEYS, LIKERT_COLUMNS):
        samples = {g: df.loc[df[by] == g, col].to_numpy() for g in levels}
        row = {"attribute": key}
        if len(levels) >= 2:
            kw = kruskal_wallis(*samples.values())
            row.update(kw_H=kw.statistic, kw_p=kw.pvalue)
        for a, b in itertools.combinations(levels, 2):
            row[f"mwu_p_{a}/{b}"] = mann_whitney_u(samples[a], samples[b]).pvalue
            table = crosstab(np.r_[np.zeros(len(samples[a])), np.ones(len(samples[b]))],
                             np.r_[samples[a], samples[b]], [0, 1], [1, 2, 3, 4, 5])
            table = table[:, table.sum(axis=0) > 0]
            if table.shape[1] >= 2:
                row[f"chi2_p_{a}/{b}"] = chi_square_independence(table).pvalue
            else:
                row[f"chi2_p_{a}/{b}"] = 1.0
        rows.append(row)
    return pd.DataFrame(rows).set_index("attribute")


def mode_association(survey: pd.DataFrame, by: str) -> tuple:
    """Chi-square test of independence between chosen mode and a categorical column."""
    df = validate_survey(survey)
    table = crosstab(df[by].to_numpy(), df["mode"].to_numpy())
    table = table[table.sum(axis=1) > 0][:, table.sum(axis=0) > 0]
    return chi_square_independence(table)


def stars(p: float) -> str:
    return "***" if p < 0.01 else "**" if p < 0.05 else "*" if p < 0.1 else ""


def stats_report(survey: pd.DataFrame) -> str:
    """Plain-text report: group comparisons, mode associations and normalised weights."""
    df = validate_survey(survey)
    out = [f"respondents: {len(df)}", ""]
    comp = compare_groups(df, "ses")
    out.append("Importance of attributes by socioeconomic group")
    pairs = [c[len("mwu_p_"):] for c in comp.columns if c.startswith("mwu_p_")]
    header = f"{'attribute':<10} {'KW H':>8} {'KW p':>9}" + "".join(
        f" {'MWU ' + p:>16} {'chi2 ' + p:>16}" for p in pairs)
    out.append(header)
    for attr, row in comp.iterrows():
        line = f"{attr:<10} {row.get('kw_H', float('nan')):8.3f} {row.get('kw_p', float('nan')):6.4f}{stars(row.get('kw_p', 1)):<3}"
        for p in pairs:
            mp, cp = row[f"mwu_p_{p}"], row[f"chi2_p_{p}"]
            line += f" {mp:13.4f}{stars(mp):<3} {cp:13.4f}{stars(cp):<3}"
        out.append(line)
    out.append("")
    out.append("Mode choice association (chi-square test of independence)")
    for col in ("ses", "sex"):
        try:
            r = mode_association(df, col)
            out.append(f"mode x {col:<4} chi2={r.statistic:.3f} df={r.df} p={r.pvalue:.4g}{stars(r.pvalue)}")
        except ValueError as exc:
            out.append(f"mode x {col:<4} not testable: {exc}")
    out.append("")
    w = normalize_weights(df)
    out.append("Weights (likert / 5): mean (sd)")
    out.append(f"{'ses':<5}" + "".join(f" {k:>13}" for k in ATTRIBUTE_KEYS))
    for ses in w["means"]:
        out.append(f"{ses:<5}" + "".join(f" {m:6.3f}({s:5.3f})" for m, s in zip(w["means"][ses], w["sds"][ses])))
    return "\n".join(out) + "\n"


def synthetic_survey(n: int, means: dict, rng: np.random.Generator,
                     ses_shares=(0.35, 0.45, 0.20), sd: float = 0.15) -> pd.DataFrame:
    """Respondents whose Likert answers scatter around ``5 * means[ses]``.

    Answers are rounded and clipped to 1..5, so the recovered means are biased
    near the ends of the scale; intended for tests and demos.
    """
    ses = rng.choice(3, size=n, p=np.asarray(ses_shares))
    likert = np.empty((n, len(ATTRIBUTE_KEYS)), dtype=int)
    for s, key in enumerate(SES_KEYS):
        idx = np.flatnonzero(ses == s)
        raw = 5 * (np.asarray(means[key]) + sd * rng.standard_normal((len(idx), len(ATTRIBUTE_KEYS))))
        likert[idx] = np.clip(np.rint(raw), 1, 5).astype(int)
    df = pd.DataFrame({
        "id": np.arange(n), "ses": [SES_KEYS[s] for s in ses],
        "sex": rng.choice(["F", "M"], size=n), "age": rng.integers(16, 75, size=n),
        "mode": rng.choice(list(MODE_KEYS), size=n),
    })
    for j, col in enumerate(LIKERT_COLUMNS):
        df[col] = likert[:, j]
    return df
