"""Dense simplex solver and the distribution-free discrepancy programs.

The programs are tiny (at most a few hundred variables at the widths the
caps allow), so a plain two-phase tableau with Bland's rule is plenty; it
never cycles and has no tuning knobs.  An exact mode runs the same algorithm
over `fractions.Fraction` for the small widths where rational certificates
are wanted.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple, Sequence

import numpy as np

from . import f2core
from .boolfun import LP_CAP, BooleanFunction


class LPResult(NamedTuple):
    x: list
    value: object


def _pivot(tab, basis, row, col) -> None:
    tab[row] = tab[row] / tab[row][col]
    pivot_row = tab[row]
    for r in range(len(tab)):
        if r != row:
            factor = tab[r][col]
            if factor != 0:
                tab[r] = tab[r] - factor * pivot_row
    basis[row] = col


def _bland_iterate(tab, basis, n_vars, tol) -> None:
    # Bland's rule: smallest eligible index on both sides; never cycles.
    m = len(tab) - 1
    while True:
        obj = tab[m]
        col = next((j for j in range(n_vars) if obj[j] < -tol), None)
        if col is None:
            return
        best_row, best_ratio = None, None
        for r in range(m):
            a = tab[r][col]
            if a > tol:
                ratio = tab[r][-1] / a
                if (
                    best_ratio is None
                    or ratio < best_ratio
                    or (ratio == best_ratio and basis[r] < basis[best_row])
                ):
                    best_row, best_ratio = r, ratio
        if best_row is None:
            raise RuntimeError("LP is unbounded")
        _pivot(tab, basis, best_row, col)


def simplex_min(
    c: Sequence,
    a_ub: Sequence[Sequence] = (),
    b_ub: Sequence = (),
    a_eq: Sequence[Sequence] = (),
    b_eq: Sequence = (),
    exact: bool = False,
) -> LPResult:
    """Minimise c.x subject to a_ub x <= b_ub, a_eq x = b_eq, x >= 0."""
    conv = Fraction if exact else float
    dtype = object if exact else np.float64
    tol = Fraction(0) if exact else 1e-11
    n = len(c)
    rows = []
    rhs = []
    n_slack = len(a_ub)
    for i, (arow, b) in enumerate(zip(a_ub, b_ub)):
        row = [conv(v) for v in arow] + [conv(0)] * n_slack
        row[n + i] = conv(1)
        rows.append(row)
        rhs.append(conv(b))
    for arow, b in zip(a_eq, b_eq):
        rows.append([conv(v) for v in arow] + [conv(0)] * n_slack)
        rhs.append(conv(b))
    total = n + n_slack
    for r in range(len(rows)):
        if rhs[r] < 0:
            rows[r] = [-v for v in rows[r]]
            rhs[r] = -rhs[r]

    m = len(rows)
    # phase 1: artificial variables, drive their sum to zero
    tab = []
    basis = []
    for r in range(m):
        row = rows[r] + [conv(0)] * m + [rhs[r]]
        row[total + r] = conv(1)
        tab.append(np.array(row, dtype=dtype))
        basis.append(total + r)
    obj = np.array([conv(0)] * (total + m + 1), dtype=dtype)
    for r in range(m):
        obj = obj - tab[r]
    obj[total : total + m] = conv(0)
    tab.append(obj)
    _bland_iterate(tab, basis, total + m, tol)
    if tab[m][-1] < -(tol * 10 * max(1, m) + (0 if exact else 1e-7)):
        raise RuntimeError("LP is infeasible")
    # force leftover artificials out of the basis where possible
    for r in range(m):
        if basis[r] >= total:
            col = next((j for j in range(total) if abs_(tab[r][j]) > tol), None)
            if col is not None:
                _pivot(tab, basis, r, col)
    keep = [r for r in range(m) if basis[r] < total]
    cols = list(range(total)) + [total + m]
    tab = [tab[r][cols] for r in keep]
    basis = [basis[r] for r in keep]

    # phase 2
    obj = np.array([conv(v) for v in c] + [conv(0)] * (n_slack + 1), dtype=dtype)
    for r, bv in enumerate(basis):
        factor = obj[bv]
        if factor != 0:
            obj = obj - factor * tab[r]
    tab.append(obj)
    _bland_iterate(tab, basis, total, tol)

    x = [conv(0)] * total
    for r, bv in enumerate(basis):
        x[bv] = tab[r][-1]
    value = sum(ci * xi for ci, xi in zip(c, x[:n]))
    return LPResult(x[:n], value)


def abs_(v):
    return -v if v < 0 else v


# ---------------------------------------------------------------------------
# The minimax coefficient-norm programs


def _sign_matrix(f: BooleanFunction) -> list[list[int]]:
    size = 1 << f.n
    return [
        [1 - 2 * ((f.table[x] + f2core.dot(x, z)) & 1) for x in range(size)]
        for z in range(size)
    ]


@dataclass(frozen=True)
class DualNormResult:
    """Solution of the minimax program min over distributions of the sup coefficient."""

    c_star: float
    disc: float
    mu: tuple
    beta: tuple
    dual_value: float

    @property
    def gap(self) -> float:
        return abs(float(self.c_star) - float(self.dual_value))


def disc_free(f: BooleanFunction, exact: bool = False) -> DualNormResult:
    """Distribution-free discrepancy via the primal/dual pair of programs.

    The primal finds weights minimising the sup coefficient norm; the dual is
    solved independently and its objective must agree (strong duality), which
    the result exposes for verification.
    """
    if f.n > LP_CAP:
        raise ValueError(f"LP solver capped at width {LP_CAP}")
    size = 1 << f.n
    s = _sign_matrix(f)

    # primal: vars mu_0..mu_{size-1}, c
    c_obj = [0] * size + [1]
    a_ub, b_ub = [], []
    for z in range(size):
        a_ub.append([s[z][x] for x in range(size)] + [-1])
        b_ub.append(0)
        a_ub.append([-s[z][x] for x in range(size)] + [-1])
        b_ub.append(0)
    a_eq = [[1] * size + [0]]
    b_eq = [1]
    primal = simplex_min(c_obj, a_ub, b_ub, a_eq, b_eq, exact=exact)

    # dual: vars u_z, w_z (beta = u - w), d+ and d-; maximise d
    nv = 2 * size + 2
    c_obj = [0] * (2 * size) + [-1, 1]
    a_ub, b_ub = [], []
    for x in range(size):
        row = [0] * nv
        for z in range(size):
            row[z] = -s[z][x]
            row[size + z] = s[z][x]
        row[2 * size] = 1
        row[2 * size + 1] = -1
        a_ub.append(row)
        b_ub.append(0)
    a_eq = [[1] * (2 * size) + [0, 0]]
    b_eq = [1]
    dual = simplex_min(c_obj, a_ub, b_ub, a_eq, b_eq, exact=exact)

    mu = tuple(primal.x[:size])
    beta = tuple(dual.x[z] - dual.x[size + z] for z in range(size))
    c_star = primal.value
    d_star = -dual.value
    import math

    disc_val = -math.log2(float(c_star)) if c_star > 0 else math.inf
    return DualNormResult(c_star, disc_val, mu, beta, d_star)
