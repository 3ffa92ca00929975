"""Dense arbitrary-precision complex linear algebra.

The kernels the inversion pipeline needs, written directly over gmpy2
scalars so every intermediate is correctly rounded at the working
precision of the active :class:`~hispectra.precision.PrecisionContext`:

* :func:`hermitian_eig`      cyclic complex Jacobi, full eigensystem
* :func:`general_eigvals`    balance + Householder Hessenberg + shifted QR
* :func:`lsq_solve`          Householder QR least squares with residual
* :func:`det`                pivoted LU determinant
* :func:`principal_minor_sum` elementary symmetric functions of a matrix

Jacobi is used for the Hermitian problem because it keeps high relative
accuracy on tiny eigenvalues, which is exactly what separating a
near-singular overlap spectrum from its noise floor requires.  Matrices
here are small (tens of rows), so the O(n^3)-per-sweep cost is irrelevant
next to the multiprecision scalar cost.
"""

from __future__ import annotations

from itertools import combinations

import gmpy2
from gmpy2 import mpc, mpfr

from .errors import ContractViolation, ConvergenceError, RankDeficientError
from .precision import PrecisionContext


class Matrix:
    """Immutable-shape dense complex matrix (row-major nested lists of mpc).

    Construction coerces entries under the active gmpy2 context; the
    dimensions are fixed for the lifetime of the object.
    """

    __slots__ = ("rows", "cols", "_d")

    def __init__(self, rows: int, cols: int, data):
        if rows < 1 or cols < 1:
            raise ContractViolation(f"matrix dimensions must be positive, got {rows}x{cols}")
        if len(data) != rows or any(len(r) != cols for r in data):
            raise ContractViolation("data shape does not match declared dimensions")
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "cols", cols)
        object.__setattr__(self, "_d", data)

    def __setattr__(self, name, value):
        raise AttributeError("Matrix shape and storage are fixed after construction")

    @classmethod
    def from_rows(cls, rows) -> "Matrix":
        data = [[mpc(x) for x in row] for row in rows]
        return cls(len(data), len(data[0]) if data else 0, data)

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "Matrix":
        zero = mpc(0)
        return cls(rows, cols, [[zero] * cols for _ in range(rows)])

    @classmethod
    def identity(cls, n: int) -> "Matrix":
        zero, one = mpc(0), mpc(1)
        return cls(n, n, [[one if i == j else zero for j in range(n)] for i in range(n)])

    def __getitem__(self, ij):
        i, j = ij
        return self._d[i][j]

    def row(self, i):
        return list(self._d[i])

    def column(self, j):
        return [r[j] for r in self._d]

    def to_lists(self):
        return [list(r) for r in self._d]

    def copy(self) -> "Matrix":
        return Matrix(self.rows, self.cols, self.to_lists())

    def conj_transpose(self) -> "Matrix":
        d = self._d
        return Matrix(
            self.cols, self.rows,
            [[_conj(d[i][j]) for i in range(self.rows)] for j in range(self.cols)],
        )

    def __matmul__(self, other: "Matrix") -> "Matrix":
        if self.cols != other.rows:
            raise ContractViolation(
                f"cannot multiply {self.rows}x{self.cols} by {other.rows}x{other.cols}")
        a, b = self._d, other._d
        out = []
        for i in range(self.rows):
            ai = a[i]
            row = []
            for j in range(other.cols):
                acc = mpc(0)
                for k in range(self.cols):
                    acc += ai[k] * b[k][j]
                row.append(acc)
            out.append(row)
        return Matrix(self.rows, other.cols, out)

    def is_hermitian(self) -> bool:
        """Exact storage-level check: entry(i,j) == conj(entry(j,i))."""
        if self.rows != self.cols:
            return False
        d = self._d
        for i in range(self.rows):
            if d[i][i].imag != 0:
                return False
            for j in range(i + 1, self.cols):
                if d[i][j] != _conj(d[j][i]):
                    return False
        return True

    def max_norm(self) -> mpfr:
        m = mpfr(0)
        for row in self._d:
            for x in row:
                a = abs(x)
                if a > m:
                    m = a
        return m

    def frobenius_norm(self) -> mpfr:
        acc = mpfr(0)
        for row in self._d:
            for x in row:
                acc += gmpy2.norm(x)
        return gmpy2.sqrt(acc)

    def __repr__(self):
        return f"Matrix({self.rows}x{self.cols})"


def _conj(z):
    return mpc(z.real, -z.imag)


# ---------------------------------------------------------------------------
# Hermitian eigenproblem: cyclic Jacobi with complex rotations
# ---------------------------------------------------------------------------

_MAX_JACOBI_SWEEPS = 60


def hermitian_eig(a: Matrix, ctx: PrecisionContext):
    """Full eigensystem of a Hermitian matrix.

    Returns ``(eigenvalues, vectors)`` with eigenvalues as real mpfr in
    ascending order and the matching eigenvectors as the columns of a
    unitary :class:`Matrix`.

    Accuracy (guaranteed loosely, achieved far better): the sweep loop
    runs until the off-diagonal Frobenius mass is below
    10**-(P + g/2) * ||A||_F, which keeps absolute eigenvalue errors a
    few guard digits under the reporting precision; reconstruction and
    orthonormality errors stay within N^2 * 10**(g/2-P) * ||A||_max.

    Raises :class:`ContractViolation` for non-Hermitian input (the check
    is exact on the stored entries) and :class:`ConvergenceError` with
    the remaining off-diagonal norm if 60 sweeps do not suffice.
    """
    if a.rows != a.cols:
        raise ContractViolation("hermitian_eig needs a square matrix")
    if not a.is_hermitian():
        raise ContractViolation("matrix is not Hermitian (exact storage check failed)")
    n = a.rows
    with ctx:
        if n == 1:
            return [mpfr(a[0, 0].real)], Matrix.identity(1)

        m = a.to_lists()
        v = Matrix.identity(n).to_lists()
        norm = a.frobenius_norm()
        if norm == 0:
            return [mpfr(0)] * n, Matrix.identity(n)
        # Termination keeps g/2 digits of slack beyond the working precision;
        # the spec-level bound 10**(g/2-P) would land exactly on the smallest
        # eigenvalues this pipeline must resolve.
        term_tol = norm * mpfr(10) ** (-(ctx.digits + ctx.guard // 2))
        skip_tol = term_tol / n

        for _ in range(_MAX_JACOBI_SWEEPS):
            rotated = False
            for p in range(n - 1):
                for q in range(p + 1, n):
                    apq = m[p][q]
                    beta = abs(apq)
                    if beta <= skip_tol:
                        continue
                    rotated = True
                    _jacobi_rotate(m, v, n, p, q, beta)
            if not rotated or _off_frobenius(m, n) <= term_tol:
                break
        else:
            raise ConvergenceError(
                f"Jacobi sweeps exhausted at off-diagonal norm {_off_frobenius(m, n)}",
                off_norm=_off_frobenius(m, n),
            )

        pairs = sorted(
            ((mpfr(m[i][i].real), i) for i in range(n)), key=lambda t: t[0]
        )
        eigenvalues = [w for w, _ in pairs]
        vec_cols = [[v[r][i] for r in range(n)] for _, i in pairs]
        vectors = Matrix(n, n, [[vec_cols[j][r] for j in range(n)] for r in range(n)])
        return eigenvalues, vectors


def _jacobi_rotate(m, v, n, p, q, beta):
    """One two-sided rotation annihilating m[p][q] (beta = |m[p][q]|)."""
    apq = m[p][q]
    alpha = m[p][p].real
    gamma = m[q][q].real
    phase = apq / beta
    theta = (alpha - gamma) / (2 * beta)
    root = gmpy2.sqrt(theta * theta + 1)
    t = 1 / (theta + root) if theta >= 0 else 1 / (theta - root)
    c = 1 / gmpy2.sqrt(1 + t * t)
    s = phase * (t * c)
    sbar = _conj(s)

    for i in range(n):
        if i == p or i == q:
            continue
        row = m[i]
        aip, aiq = row[p], row[q]
        row[p] = c * aip - sbar * aiq
        row[q] = s * aip + c * aiq
        # mirror entries keep exact Hermitian storage
        m[p][i] = _conj(row[p])
        m[q][i] = _conj(row[q])
    shift = t * beta
    m[p][p] = mpc(alpha - shift)
    m[q][q] = mpc(gamma + shift)
    zero = mpc(0)
    m[p][q] = zero
    m[q][p] = zero

    for i in range(n):
        row = v[i]
        vip, viq = row[p], row[q]
        row[p] = c * vip - sbar * viq
        row[q] = s * vip + c * viq


def _off_frobenius(m, n):
    acc = mpfr(0)
    for i in range(n):
        row = m[i]
        for j in range(n):
            if i != j:
                acc += gmpy2.norm(row[j])
    return gmpy2.sqrt(acc)


# ---------------------------------------------------------------------------
# General complex eigenvalues: balance -> Hessenberg -> shifted QR
# ---------------------------------------------------------------------------

_QR_MAX_ITER_PER_BLOCK = 40


def general_eigvals(a: Matrix, ctx: PrecisionContext):
    """Eigenvalues (only) of a general square complex matrix.

    Pipeline: Parlett-Reinsch balancing with radix-2 scalings, Householder
    reduction to upper Hessenberg form, then single-shift QR with the
    Wilkinson shift and a relative deflation threshold of 10**(g/2-P).
    Balancing matters here: the reduced pipeline matrices have rows scaled
    by inverse eigenvalues spanning dozens of orders of magnitude, and the
    diagonal similarity brings them back to order one before QR.

    Returns the eigenvalues as a list of mpc in deflation order.
    """
    if a.rows != a.cols:
        raise ContractViolation("general_eigvals needs a square matrix")
    n = a.rows
    with ctx:
        if n == 1:
            return [mpc(a[0, 0])]
        h = a.to_lists()
        _balance(h, n)
        _hessenberg(h, n)
        tol = mpfr(10) ** (ctx.guard // 2 - ctx.digits)
        return _hessenberg_qr_eigvals(h, n, tol)


def _balance(m, n):
    """Diagonal similarity with powers of two equalizing row/column norms."""
    radix = mpfr(2)
    sqrdx = radix * radix
    limit = mpfr("0.95")
    while True:
        converged = True
        for i in range(n):
            r = mpfr(0)
            c = mpfr(0)
            for j in range(n):
                if j != i:
                    c += abs(m[j][i])
                    r += abs(m[i][j])
            if c == 0 or r == 0:
                continue
            g = r / radix
            f = mpfr(1)
            s = c + r
            while c < g:
                f *= radix
                c *= sqrdx
            g = r * radix
            while c > g:
                f /= radix
                c /= sqrdx
            if (c + r) / f < limit * s:
                converged = False
                ginv = 1 / f
                for j in range(n):
                    m[i][j] *= ginv
                for j in range(n):
                    m[j][i] *= f
        if converged:
            return


def _hessenberg(m, n):
    """In-place Householder reduction to upper Hessenberg form."""
    for k in range(n - 2):
        xnorm2 = mpfr(0)
        for i in range(k + 1, n):
            xnorm2 += gmpy2.norm(m[i][k])
        if xnorm2 == 0:
            continue
        xnorm = gmpy2.sqrt(xnorm2)
        x0 = m[k + 1][k]
        if x0 != 0:
            alpha = -(x0 / abs(x0)) * xnorm
        else:
            alpha = mpc(-xnorm)
        v = [m[i][k] for i in range(k + 1, n)]
        v[0] = v[0] - alpha
        vnorm2 = mpfr(0)
        for z in v:
            vnorm2 += gmpy2.norm(z)
        if vnorm2 == 0:
            continue
        beta = 2 / vnorm2

        # left: rows k+1..n-1 of columns k..n-1
        for j in range(k, n):
            acc = mpc(0)
            for i in range(k + 1, n):
                acc += _conj(v[i - k - 1]) * m[i][j]
            acc *= beta
            for i in range(k + 1, n):
                m[i][j] -= acc * v[i - k - 1]
        # right: columns k+1..n-1 of all rows
        for i in range(n):
            row = m[i]
            acc = mpc(0)
            for j in range(k + 1, n):
                acc += row[j] * v[j - k - 1]
            acc *= beta
            for j in range(k + 1, n):
                row[j] -= acc * _conj(v[j - k - 1])
        m[k + 1][k] = alpha
        for i in range(k + 2, n):
            m[i][k] = mpc(0)


def _wilkinson_shift(m, hi):
    a = m[hi - 1][hi - 1]
    b = m[hi - 1][hi]
    c = m[hi][hi - 1]
    d = m[hi][hi]
    delta = (a - d) / 2
    disc = gmpy2.sqrt(delta * delta + b * c)
    lam1 = d + delta + disc
    lam2 = d + delta - disc
    return lam1 if abs(lam1 - d) <= abs(lam2 - d) else lam2


def _givens(f, g):
    """Complex Givens pair (c real, s) with [[c, s], [-conj(s), c]] zeroing g."""
    if g == 0:
        return mpfr(1), mpc(0)
    if f == 0:
        ag = abs(g)
        return mpfr(0), _conj(g) / ag
    af = abs(f)
    d = gmpy2.sqrt(af * af + gmpy2.norm(g))
    c = af / d
    s = (f / af) * _conj(g) / d
    return c, s


def _hessenberg_qr_eigvals(m, n, tol):
    eigenvalues = []
    hi = n - 1
    iterations = 0
    while hi >= 0:
        if hi == 0:
            eigenvalues.append(m[0][0])
            break
        # deflate any negligible subdiagonal, smallest active block wins
        lo = hi
        while lo > 0:
            sub = abs(m[lo][lo - 1])
            scale = abs(m[lo - 1][lo - 1]) + abs(m[lo][lo])
            if scale == 0:
                scale = _off_frobenius(m, n) + abs(m[lo][lo - 1])
            if sub <= tol * scale:
                m[lo][lo - 1] = mpc(0)
                break
            lo -= 1
        if lo == hi:
            eigenvalues.append(m[hi][hi])
            hi -= 1
            iterations = 0
            continue

        if iterations >= _QR_MAX_ITER_PER_BLOCK:
            raise ConvergenceError(
                f"QR iteration stalled on a block of size {hi - lo + 1}",
                block_size=hi - lo + 1,
            )
        if iterations and iterations % 12 == 0:
            # deterministic exceptional shift to break symmetric stalls
            sigma = mpc(abs(m[hi][hi - 1]) + abs(m[hi - 1][hi - 2]) if hi - 2 >= lo
                        else abs(m[hi][hi - 1]))
            sigma += m[hi][hi]
        else:
            sigma = _wilkinson_shift(m, hi)
        iterations += 1

        for i in range(lo, hi + 1):
            m[i][i] -= sigma
        rotations = []
        for i in range(lo, hi):
            c, s = _givens(m[i][i], m[i + 1][i])
            rotations.append((c, s))
            sbar = _conj(s)
            for j in range(i, hi + 1):
                fij, gij = m[i][j], m[i + 1][j]
                m[i][j] = c * fij + s * gij
                m[i + 1][j] = -sbar * fij + c * gij
        for i in range(lo, hi):
            c, s = rotations[i - lo]
            sbar = _conj(s)
            top = min(i + 2, hi + 1)
            for r in range(lo, top):
                fri, gri = m[r][i], m[r][i + 1]
                m[r][i] = c * fri + sbar * gri
                m[r][i + 1] = -s * fri + c * gri
        for i in range(lo, hi + 1):
            m[i][i] += sigma
    return eigenvalues


# ---------------------------------------------------------------------------
# Least squares, determinant, principal minors
# ---------------------------------------------------------------------------


def lsq_solve(a: Matrix, b, ctx: PrecisionContext):
    """Least-squares solution of A x = b by Householder QR.

    ``b`` is a sequence of scalars with one entry per row of ``a``.
    Returns ``(x, residual_norm)`` where ``x`` minimizes the Euclidean
    misfit at working precision.  QR rather than normal equations: the
    amplitude-recovery systems have near-coalescing columns, and squaring
    their condition number would cost half the available digits.

    Raises :class:`RankDeficientError` naming the first column whose
    remaining norm falls below 10**(g/2-P) * ||A||_F.
    """
    if a.rows < a.cols:
        raise ContractViolation("least squares needs rows >= cols")
    if len(b) != a.rows:
        raise ContractViolation(f"right-hand side has {len(b)} entries for {a.rows} rows")
    mrows, ncols = a.rows, a.cols
    with ctx:
        r = a.to_lists()
        y = [mpc(x) for x in b]
        rank_tol = a.frobenius_norm() * mpfr(10) ** (ctx.guard // 2 - ctx.digits)

        for k in range(ncols):
            cnorm2 = mpfr(0)
            for i in range(k, mrows):
                cnorm2 += gmpy2.norm(r[i][k])
            cnorm = gmpy2.sqrt(cnorm2)
            if cnorm <= rank_tol:
                raise RankDeficientError(
                    f"column {k} is numerically dependent on its predecessors",
                    column=k,
                )
            x0 = r[k][k]
            alpha = -(x0 / abs(x0)) * cnorm if x0 != 0 else mpc(-cnorm)
            v = [r[i][k] for i in range(k, mrows)]
            v[0] = v[0] - alpha
            vnorm2 = mpfr(0)
            for z in v:
                vnorm2 += gmpy2.norm(z)
            if vnorm2 != 0:
                beta = 2 / vnorm2
                for j in range(k + 1, ncols):
                    acc = mpc(0)
                    for i in range(k, mrows):
                        acc += _conj(v[i - k]) * r[i][j]
                    acc *= beta
                    for i in range(k, mrows):
                        r[i][j] -= acc * v[i - k]
                acc = mpc(0)
                for i in range(k, mrows):
                    acc += _conj(v[i - k]) * y[i]
                acc *= beta
                for i in range(k, mrows):
                    y[i] -= acc * v[i - k]
            r[k][k] = alpha
            for i in range(k + 1, mrows):
                r[i][k] = mpc(0)

        x = [mpc(0)] * ncols
        for k in range(ncols - 1, -1, -1):
            acc = y[k]
            for j in range(k + 1, ncols):
                acc -= r[k][j] * x[j]
            x[k] = acc / r[k][k]
        res2 = mpfr(0)
        for i in range(ncols, mrows):
            res2 += gmpy2.norm(y[i])
        return x, gmpy2.sqrt(res2)


def det(a: Matrix, ctx: PrecisionContext):
    """Determinant via partially pivoted LU elimination (zero is a valid result)."""
    if a.rows != a.cols:
        raise ContractViolation("determinant needs a square matrix")
    n = a.rows
    with ctx:
        m = a.to_lists()
        sign_flips = 0
        for k in range(n):
            piv, pmax = k, abs(m[k][k])
            for i in range(k + 1, n):
                cand = abs(m[i][k])
                if cand > pmax:
                    piv, pmax = i, cand
            if pmax == 0:
                return mpc(0)
            if piv != k:
                m[k], m[piv] = m[piv], m[k]
                sign_flips += 1
            pivot = m[k][k]
            for i in range(k + 1, n):
                factor = m[i][k] / pivot
                if factor == 0:
                    continue
                row_i, row_k = m[i], m[k]
                for j in range(k + 1, n):
                    row_i[j] -= factor * row_k[j]
        result = mpc(1)
        for k in range(n):
            result *= m[k][k]
        return -result if sign_flips % 2 else result


def principal_minor_sum(a: Matrix, order: int, ctx: PrecisionContext):
    """Sum of all order-k principal minors (elementary symmetric function e_k).

    ``order == 1`` is the trace, ``order == n`` the determinant.
    """
    if a.rows != a.cols:
        raise ContractViolation("principal minors need a square matrix")
    n = a.rows
    if not 1 <= order <= n:
        raise ContractViolation(f"minor order must lie in [1, {n}], got {order}")
    with ctx:
        if order == n:
            return det(a, ctx)
        total = mpc(0)
        d = a.to_lists()
        for subset in combinations(range(n), order):
            sub = Matrix(order, order, [[d[i][j] for j in subset] for i in subset])
            total += det(sub, ctx)
        return total
