#!/usr/bin/env python3
"""Generate data/processed.cleveland.data, a synthetic stand-in for the UCI
processed Cleveland heart-disease file.

The original file cannot be redistributed from this environment, so the repo
ships a surrogate that preserves the properties the toolkit and its tests
depend on:

  * exactly 303 records in the 14-field processed-Cleveland format
    (age, sex, cp, trestbps, chol, fbs, restecg, thalach, exang, oldpeak,
    slope, ca, thal, num), floats printed with one decimal and the outcome
    as a bare integer;
  * outcome grades distributed 164/55/36/35/13 over num = 0..4, giving the
    published binary class split of 164 healthy vs 139 diseased;
  * six missing cells marked "?", four in `ca` and two in `thal`, at the
    same 1-based row positions as the original (167, 193, 288, 303 for ca;
    88, 267 for thal);
  * feature marginals close to the published Cleveland summary statistics;
  * a generative model with a dominant severity factor carried
    redundantly by the classic markers (cp, ca, thal, exang, oldpeak,
    thalach, slope) plus a smooth XOR-style synergy of two secondary
    factors (carried by restecg/trestbps/fbs and chol/sex/age), so the
    outcome is separable to high accuracy by a sufficiently wide network
    but not by a linear model or through a narrow first layer;
  * a few feature outliers (cholesterol spikes) so regularization has
    something to suppress.

Deterministic: a fixed seed reproduces the shipped file byte for byte.

Usage: python3 tools/generate_surrogate_data.py [output_path]
"""

import sys

import numpy as np

SEED = 20250810
N = 303
GRADE_COUNTS = {0: 164, 1: 55, 2: 36, 3: 35, 4: 13}
CA_MISSING_ROWS = [167, 193, 288, 303]  # 1-based
THAL_MISSING_ROWS = [88, 267]


def sigmoid(v):
    return 1.0 / (1.0 + np.exp(-v))


def generate(rng):
    # A dominant severity factor drives most features; two secondary
    # factors contribute through a smooth XOR-style synergy that only a
    # sufficiently wide first layer can represent.
    # Bimodal severity: most patients sit clearly on one side, the overlap
    # band is decided by the synergy term.
    side = rng.random(N) < 139.0 / N
    s_core = np.where(side, rng.normal(1.0, 0.50, N), rng.normal(-1.0, 0.50, N))
    z_a = rng.normal(size=N)
    z_b = rng.normal(size=N)
    synergy = np.tanh(1.5 * z_a) * np.tanh(1.5 * z_b)
    risk = 1.30 * s_core + 0.45 * synergy + rng.normal(0.0, 0.08, size=N)

    # Assign grades by risk rank so the class counts are exact.
    order = np.argsort(-risk)  # highest risk first
    grades = np.zeros(N, dtype=int)
    cursor = 0
    for g in (4, 3, 2, 1):
        count = GRADE_COUNTS[g]
        grades[order[cursor : cursor + count]] = g
        cursor += count

    rows = []
    for i in range(N):
        sc, va, vb = s_core[i], z_a[i], z_b[i]
        g = int(grades[i])

        # Severity carriers, deliberately redundant.
        c = 0.95 * sc + rng.normal(0.0, 0.20)
        if c > 0.25:
            cp = 4.0
        elif c > -0.35:
            cp = 3.0
        elif c > -0.95:
            cp = 2.0
        else:
            cp = 1.0

        ca = float(rng.binomial(3, sigmoid(-1.30 + 2.20 * sc)))

        t = 1.10 * sc + rng.normal(0.0, 0.18)
        if t > 0.30:
            thal = 7.0
        elif t > 0.05:
            thal = 6.0
        else:
            thal = 3.0

        exang = 1.0 if rng.random() < sigmoid(-0.80 + 1.90 * sc) else 0.0

        oldpeak = float(np.clip(0.45 + 1.00 * sc + rng.normal(0.0, 0.18), 0.0, 6.2))
        oldpeak = round(oldpeak, 1)

        sl = 0.95 * sc + rng.normal(0.0, 0.25)
        if sl > 0.45:
            slope = 3.0 if rng.random() < 0.25 else 2.0
        elif sl > -0.25:
            slope = 2.0
        else:
            slope = 1.0

        age = int(round(float(np.clip(53.0 + 4.0 * sc + 6.0 * vb + rng.normal(0.0, 4.0), 29, 77))))

        thalach = float(
            int(
                round(
                    float(
                        np.clip(
                            156.0
                            - 20.0 * sc
                            - 0.45 * (age - 53.0)
                            + rng.normal(0.0, 5.0),
                            71,
                            202,
                        )
                    )
                )
            )
        )

        # First synergy factor carriers.
        r = 1.00 * va + rng.normal(0.0, 0.40)
        if r > 0.05:
            restecg = 2.0
        elif r > 0.0:
            restecg = 1.0
        else:
            restecg = 0.0
        trestbps = float(
            int(round(float(np.clip(129.0 + 18.0 * va + rng.normal(0.0, 8.0), 94, 200))))
        )
        fbs = 1.0 if rng.random() < sigmoid(-1.50 + 1.50 * va) else 0.0

        # Second synergy factor carriers.
        chol = float(np.clip(243.0 + 42.0 * vb + rng.normal(0.0, 16.0), 126, 430))
        if rng.random() < 0.01:
            chol = float(np.clip(chol + 140.0, 126, 564))
        chol = float(int(round(chol)))
        sex = 1.0 if rng.random() < sigmoid(0.80 + 1.00 * vb + 0.25 * sc) else 0.0

        rows.append(
            [
                float(age), sex, cp, trestbps, chol, fbs, restecg,
                thalach, exang, oldpeak, slope, ca, thal, g,
            ]
        )
    return rows


def format_rows(rows):
    lines = []
    for i, row in enumerate(rows, start=1):
        fields = [f"{v:.1f}" for v in row[:13]]
        if i in CA_MISSING_ROWS:
            fields[11] = "?"
        if i in THAL_MISSING_ROWS:
            fields[12] = "?"
        fields.append(str(row[13]))
        lines.append(",".join(fields))
    return "\n".join(lines) + "\n"


def sanity_check(rows, text):
    assert len(rows) == N
    ones = sum(1 for r in rows if r[13] >= 1)
    assert ones == 139 and N - ones == 164, (ones, N - ones)
    assert text.count("?") == 6
    ages = np.array([r[0] for r in rows])
    chols = np.array([r[4] for r in rows])
    thalachs = np.array([r[7] for r in rows])
    print(f"records: {len(rows)}, classes: {N - ones}/{ones}")
    print(f"age   mean {ages.mean():6.2f}  (published 54.44)")
    print(f"chol  mean {chols.mean():6.2f}  (published 246.69)")
    print(f"thalach mean {thalachs.mean():6.2f}  (published 149.61)")
    print(f"male fraction {np.mean([r[1] for r in rows]):.3f}  (published 0.680)")
    print(f"cp=4 fraction {np.mean([r[2] == 4.0 for r in rows]):.3f}  (published 0.475)")

    # Reference separability: linear model vs a wide nonlinear model.
    try:
        from sklearn.linear_model import LogisticRegression
        from sklearn.model_selection import cross_val_score
        from sklearn.neural_network import MLPClassifier

        x = np.array([[v if v != "?" else -1.0 for v in r[:13]] for r in rows], dtype=float)
        x = x / np.linalg.norm(x, axis=0, keepdims=True)
        y = np.array([1 if r[13] >= 1 else 0 for r in rows])
        lin = cross_val_score(LogisticRegression(max_iter=5000, C=1e6), x * 50, y, cv=3).mean()
        mlp = cross_val_score(
            MLPClassifier(hidden_layer_sizes=(32, 16), max_iter=4000, random_state=0),
            x * 50, y, cv=3,
        ).mean()
        print(f"reference linear cv3 accuracy {lin:.3f}, wide-MLP cv3 accuracy {mlp:.3f}")
    except ImportError:
        pass


def main():
    out_path = sys.argv[1] if len(sys.argv) > 1 else "data/processed.cleveland.data"
    rng = np.random.default_rng(SEED)
    rows = generate(rng)
    text = format_rows(rows)
    sanity_check(rows, text)
    with open(out_path, "w") as f:
        f.write(text)
    print(f"wrote {out_path}")


if __name__ == "__main__":
    main()
