"""Brute-force checks on dense finite sections of the shift.

Nothing here uses the closed-form machinery except as the thing being
checked: matrices are built entry by entry, multiplied densely, and
semidefiniteness is decided by exact symmetric elimination.

Truncation contract: S_D^j e_v is correct whenever depth(v) + j <= D, so
every assertion is restricted to that safe subspace.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import comb
from typing import Any

import numpy as np

from .classify import check_che, h_value
from .shiftmodel import ShiftModel, Truncation, truncate_matrix
from .surd import ONE, ZERO, Surd
from .verdict import fmt

FLOAT_TOL = 1e-10


@dataclass(frozen=True)
class SafeSubspace:
    order: int
    indices: tuple[int, ...]


def safe_subspace(tr: Truncation, m: ShiftModel, order: int) -> SafeSubspace:
    idx = tuple(i for i, r in enumerate(tr.refs) if m.depth(r) + order <= tr.depth)
    return SafeSubspace(order, idx)


# ---------------------------------------------------------------- dense surd algebra


def _sparse_rows(a):
    return [[(j, x) for j, x in enumerate(row) if x] for row in a]


def matmul(a, b):
    if isinstance(a, np.ndarray):
        return a @ b
    n, p = len(a), len(b[0])
    rows_b = _sparse_rows(b)
    out = []
    for i in range(n):
        acc: dict[int, Surd] = {}
        for k, x in enumerate(a[i]):
            if not x:
                continue
            for j, y in rows_b[k]:
                acc[j] = acc.get(j, ZERO) + x * y
        out.append([acc.get(j, ZERO) for j in range(p)])
    return out


def transpose(a):
    if isinstance(a, np.ndarray):
        return a.T.copy()
    return [list(col) for col in zip(*a)]


def identity(n: int, exact: bool):
    if not exact:
        return np.eye(n)
    return [[ONE if i == j else ZERO for j in range(n)] for i in range(n)]


def add(a, b, s=1):
    if isinstance(a, np.ndarray):
        return a + s * b
    return [[x + (y if s == 1 else y * s) if y else x for x, y in zip(ra, rb)] for ra, rb in zip(a, b)]


def _close(x: float, y: Fraction) -> bool:
    return abs(x - float(y)) <= FLOAT_TOL * max(1.0, abs(float(y)))


def _entry_ok(x, c: Fraction, exact: bool) -> bool:
    """Matrix entry x against the weight sqrt(c)."""
    if exact:
        return x == Surd.sqrt(c)
    r = float(c) ** 0.5
    return abs(x - r) <= FLOAT_TOL * max(1.0, r)


# ---------------------------------------------------------------- semidefiniteness


@dataclass
class PSDResult:
    psd: bool
    witness: dict[int, Fraction] | None = None
    value: Fraction | None = None


def psd_check(r: list[list[Fraction]]) -> PSDResult:
    """Exact symmetric elimination with diagonal pivoting.

    On failure returns y with y^T r y < 0, lifted back through the
    eliminated pivots.
    """
    n = len(r)
    rows = [{j: x for j, x in enumerate(row) if x} for row in r]
    active = set(range(n))
    history: list[tuple[int, dict[int, Fraction], Fraction]] = []

    def lift(z: dict[int, Fraction]) -> dict[int, Fraction]:
        for k, row, p in reversed(history):
            z[k] = -sum((x * z.get(j, 0) for j, x in row.items()), Fraction(0)) / p
        return {i: x for i, x in z.items() if x}

    while active:
        order = sorted(active)
        for i in order:
            d = rows[i].get(i, Fraction(0))
            if d < 0:
                return PSDResult(False, lift({i: Fraction(1)}), d)
        pivots = [i for i in order if rows[i].get(i, 0) > 0]
        if not pivots:
            for i in order:
                for j, x in rows[i].items():
                    if j != i and j in active:
                        sgn = 1 if x > 0 else -1
                        return PSDResult(False, lift({i: Fraction(1), j: Fraction(-sgn)}), -2 * abs(x))
            return PSDResult(True)
        k = max(pivots, key=lambda i: (rows[i][i], -i))
        p = rows[k][k]
        rk = {j: x for j, x in rows[k].items() if j != k and j in active}
        for i, xi in rk.items():
            ri = rows[i]
            f = xi / p
            for j, xj in rk.items():
                v = ri.get(j, Fraction(0)) - f * xj
                if v:
                    ri[j] = v
                else:
                    ri.pop(j, None)
            ri.pop(k, None)
        history.append((k, rk, p))
        active.discard(k)
    return PSDResult(True)


def _scaling(tr: Truncation) -> list[Surd]:
    """d_v = S[v, p(v)] * d_{p(v)}, read off the matrix (1 where the weight is 0)."""
    a = tr.matrix
    n = len(a)
    d = [ONE] * n
    for i in range(n):
        for j in range(n):
            if a[i][j]:
                d[i] = a[i][j] * d[j]
                break
    return d


def _rationalize(mat, d: list[Surd], idx) -> list[list[Fraction]]:
    """D^-1 M D^-1 on the given coordinates; a congruence, so inertia is kept."""
    out = []
    for i in idx:
        row = []
        for j in idx:
            x = mat[i][j]
            row.append((x / (d[i] * d[j])).to_fraction() if x else Fraction(0))
        out.append(row)
    return out


def _witness_json(tr: Truncation, d: list[Surd], idx, y: dict[int, Fraction]) -> list[list[str]]:
    return [[tr.labels[idx[i]], str(Surd(y[i]) / d[idx[i]])] for i in sorted(y)]


def semidefinite(tr: Truncation, mat, idx, negative: bool = False) -> tuple[bool, dict[str, Any]]:
    d = _scaling(tr)
    r = _rationalize(mat, d, idx)
    if negative:
        r = [[-x for x in row] for row in r]
    res = psd_check(r)
    if res.psd:
        return True, {}
    # re-evaluate the form directly as an independent check of the witness
    x = {idx[i]: Surd(v) / d[idx[i]] for i, v in res.witness.items()}
    val = Fraction(0)
    for i, xi in x.items():
        for j, xj in x.items():
            if mat[i][j]:
                val += (xi * mat[i][j] * xj).to_fraction()
    val = -val if negative else val
    if val != res.value:
        raise AssertionError(f"witness value mismatch: {val} != {res.value}")
    return False, {"witness": _witness_json(tr, d, idx, res.witness), "value": fmt(-val if negative else val)}


# ---------------------------------------------------------------- verifiers


def verify_power_formula(m: ShiftModel, D: int, n: int, exact: bool = True) -> dict[str, Any]:
    """Compare dense powers of S_D and S_D^T with the closed forms, orders 0..n."""
    if n > D:
        raise ValueError("order exceeds truncation depth")
    tr = truncate_matrix(m, D, exact)
    s, st = tr.matrix, transpose(tr.matrix)
    size = len(tr.refs)
    power, adj = identity(size, exact), identity(size, exact)
    failures: list[str] = []
    checked = 0
    for j in range(n + 1):
        if j:
            power, adj = matmul(s, power), matmul(st, adj)
        for ci in safe_subspace(tr, m, j).indices:
            v = tr.refs[ci]
            expected = {tr.index(u): c for u, c in m.kth_children(v, j)}
            col = [power[i][ci] for i in range(size)]
            for i in range(size):
                c = expected.get(i, Fraction(0))
                ok = _entry_ok(col[i], c, exact)
                if not ok:
                    failures.append(f"S^{j} e_{tr.labels[ci]} at {tr.labels[i]}")
            nsq = sum((x.square() for x in col), Fraction(0)) if exact else float(np.dot(col, col))
            ok = nsq == m.norm_sq(v, j) if exact else _close(nsq, m.norm_sq(v, j))
            if not ok:
                failures.append(f"||S^{j} e_{tr.labels[ci]}||^2")
            checked += 1
        for ci, v in enumerate(tr.refs):
            target = None
            if m.depth(v) >= j:
                u = v
                for _ in range(j):
                    u = m.parent(u)
                target = (tr.index(u), m.lambda_k_sq(v, j))
            col = [adj[i][ci] for i in range(size)]
            for i in range(size):
                c = target[1] if target and target[0] == i else Fraction(0)
                ok = _entry_ok(col[i], c, exact)
                if not ok:
                    failures.append(f"S*^{j} e_{tr.labels[ci]} at {tr.labels[i]}")
    return {
        "check": "power_formula",
        "depth": D,
        "order": n,
        "mode": "exact" if exact else "float",
        "columns_checked": checked,
        "passed": not failures,
        "failures": failures[:20],
    }


def verify_hyponormal(m: ShiftModel, D: int) -> dict[str, Any]:
    """PSD-ness of the compressed self-commutator against h^<1> <= 1."""
    tr = truncate_matrix(m, D, True)
    s, st = tr.matrix, transpose(tr.matrix)
    comm = add(matmul(st, s), matmul(s, st), -1)
    idx = safe_subspace(tr, m, 1).indices
    psd, extra = semidefinite(tr, comm, idx)
    h_ok = True
    worst = None
    for v in tr.refs:
        if m.depth(v) + 2 <= D:
            h = h_value(m, v, 1)
            if h > 1:
                h_ok = False
                worst = (m.label(v), h)
                break
    out = {"check": "hyponormal", "depth": D, "psd": psd, "h_ok": h_ok, "agree": psd == h_ok, "passed": psd == h_ok}
    if worst:
        out["h_violation"] = {"vertex": worst[0], "value": fmt(worst[1])}
    out.update(extra)
    return out


def a_forms(s, n_max: int):
    """A_0..A_{n_max} by the recurrence and by the binomial sum."""
    size = len(s)
    st = transpose(s)
    exact = not isinstance(s, np.ndarray)
    rec = [identity(size, exact)]
    for _ in range(n_max):
        a = rec[-1]
        rec.append(add(a, matmul(st, matmul(a, s)), -1))
    grams = [identity(size, exact)]
    p = identity(size, exact)
    for _ in range(n_max):
        p = matmul(s, p)
        grams.append(matmul(transpose(p), p))
    binom = []
    for n in range(n_max + 1):
        acc = [[ZERO] * size for _ in range(size)] if exact else np.zeros((size, size))
        for i in range(n + 1):
            acc = add(acc, grams[i], (-1) ** i * comb(n, i))
        binom.append(acc)
    return rec, binom


def verify_An(m: ShiftModel, D: int, n_max: int = 4) -> dict[str, Any]:
    """Build A_n(S_D); compress A_n to depth(v) + n <= D and test its sign."""
    tr = truncate_matrix(m, D, True)
    rec, binom = a_forms(tr.matrix, n_max)
    match = all(x == y for n in range(n_max + 1) for ra, rb in zip(rec[n], binom[n]) for x, y in zip(ra, rb))
    che = check_che(m).verdict
    nsd, zero, details = {}, {}, {}
    for n in range(1, n_max + 1):
        idx = safe_subspace(tr, m, n).indices
        zero[n] = all(not rec[n][i][j] for i in idx for j in idx)
        ok, extra = semidefinite(tr, rec[n], idx, negative=True)
        nsd[n] = ok
        if extra:
            details[n] = extra
    passed = match and (all(nsd.values()) if che.holds else True)
    return {
        "check": "A_n",
        "depth": D,
        "n_max": n_max,
        "recurrence_matches_binomial": match,
        "che": che.status,
        "nsd": nsd,
        "zero": zero,
        "violations": details,
        "passed": passed,
    }


def run_oracle(m: ShiftModel, D: int = 12, n: int = 4, exact: bool = True) -> dict[str, Any]:
    reports = [
        verify_power_formula(m, D, n, exact),
        verify_hyponormal(m, D),
        verify_An(m, D, n),
    ]
    return {"depth": D, "order": n, "reports": reports, "passed": all(r["passed"] for r in reports)}
