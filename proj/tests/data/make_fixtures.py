"""Regenerate the CSV fixtures used by the CLI tests.

Run from this directory: python3 make_fixtures.py
Needs numpy only. Output is deterministic for a given numpy version.
"""

import numpy as np


def extreme_mask(y, gamma):
    n = len(y)
    n_sel = int(np.floor(gamma * n + 0.5))
    order = np.argsort(y, kind="stable")
    low = order[: n_sel // 2]
    rest = order[n_sel // 2 :]
    # high tail: largest values, ties to the lower index
    rest = sorted(rest, key=lambda i: (-y[i], i))
    high = rest[: n_sel - n_sel // 2]
    mask = np.zeros(n, dtype=bool)
    mask[low] = True
    mask[high] = True
    return mask


def fmt(v):
    return repr(float(v))


def write(path, header, rows):
    with open(path, "w", newline="\n") as f:
        f.write(",".join(header) + "\n")
        for r in rows:
            f.write(",".join(r) + "\n")


def study():
    rng = np.random.default_rng(20240607)
    n = 400
    x = rng.normal(0.0, np.sqrt(5.0), n)
    y = 5.0 + 0.4 * x + rng.normal(0.0, np.sqrt(5.0), n)
    null = rng.normal(3.0, 1.0, n)
    conc = 10 ** (1.0 + 0.05 * x + rng.normal(0.0, 0.3, n))
    mask = extreme_mask(y, 0.2)
    rows = []
    for i in range(n):
        cell = lambda v: fmt(v) if mask[i] else ("NA" if i % 2 else "")
        rows.append([f"S{i + 1:03d}", fmt(y[i]), cell(x[i]), cell(null[i]), cell(conc[i])])
    write("study.csv", ["id", "y", "marker", "null_marker", "conc"], rows)
    return x[mask], y[mask], y


def full_study():
    rng = np.random.default_rng(7)
    n = 150
    x = rng.normal(1.0, 2.0, n)
    y = -2.0 + 0.7 * x + rng.normal(0.0, 1.5, n)
    write("full.csv", ["id", "y", "marker"],
          [[str(i + 1), fmt(y[i]), fmt(x[i])] for i in range(n)])
    slope = np.polyfit(x, y, 1)[0]
    return slope


def check_sets():
    rng = np.random.default_rng(99)
    n = 800
    y = rng.normal(0.0, 1.0, n)
    x = 0.5 * y + rng.normal(0.0, 1.0, n)
    mask = extreme_mask(y, 0.2)
    write("check_normal.csv", ["id", "y", "marker"],
          [[str(i + 1), fmt(y[i]), fmt(x[i]) if mask[i] else ""] for i in range(n)])

    y2 = rng.lognormal(0.0, 1.0, n)
    x2 = 0.5 * y2 + rng.normal(0.0, 1.0, n)
    mask2 = extreme_mask(y2, 0.2)
    write("check_lognormal.csv", ["id", "y", "marker"],
          [[str(i + 1), fmt(y2[i]), fmt(x2[i]) if mask2[i] else ""] for i in range(n)])


def null_screen():
    rng = np.random.default_rng(13)
    n = 440
    y = rng.normal(0.0, 1.0, n)
    mask = extreme_mask(y, 0.2)
    cols = [rng.normal(0.0, 1.0, n) for _ in range(13)]
    header = ["id", "y"] + [f"b{k + 1:02d}" for k in range(13)]
    rows = []
    for i in range(n):
        rows.append([str(i + 1), fmt(y[i])] + [fmt(c[i]) if mask[i] else "" for c in cols])
    write("null_screen.csv", header, rows)


def reverse_regression_check(xs, ys, y_full):
    """Independent ODEB computation for the analyze golden file spot check."""
    n_s = len(xs)
    design = np.column_stack([np.ones(n_s), ys])
    (a_x, b_x), *_ = np.linalg.lstsq(design, xs, rcond=None)
    resid = xs - design @ np.array([a_x, b_x])
    s = resid @ resid / (n_s - 2)
    se_bx = np.sqrt(s / np.sum((ys - ys.mean()) ** 2))
    mu = y_full.mean()
    v = y_full.var(ddof=1)
    den = s + b_x**2 * v
    beta = b_x * v / den
    alpha = (s * mu - a_x * b_x * v) / den
    r = s / v
    n_f = len(y_full)
    se = np.sqrt(((r - b_x**2) ** 2 * se_bx**2
                  + 2 * b_x**2 * r**2 * (1 / (n_s - 2) + 1 / (n_f - 1))) / (r + b_x**2) ** 4)
    return beta, alpha, se


if __name__ == "__main__":
    xs, ys, y_full = study()
    print("study.csv reverse-regression check (beta_y, alpha_y, se):",
          *map(repr, reverse_regression_check(xs, ys, y_full)))
    print("full.csv forward OLS slope:", repr(full_study()))
    check_sets()
    null_screen()
