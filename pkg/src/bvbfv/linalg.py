"""Exact rational sparse linear algebra.

Everything downstream (cohomology, moduli spaces, pairings) reduces to the
kernel/image/quotient/orthogonality operations in this module.  Matrices are
sparse maps (row, col) -> Fraction; the elimination core is fraction-free
(integer row combinations after clearing denominators) with a fixed pivot
rule, so all bases are deterministic across runs.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd


class LinalgError(Exception):
    pass


class DimensionMismatch(LinalgError):
    pass


class SubspaceNotContained(LinalgError):
    pass


class NotTransversal(LinalgError):
    pass


class NotLagrangian(LinalgError):
    pass


# ---------------------------------------------------------------------------
# sparse vectors: dict index -> Fraction (zero entries never stored)


def vec_add(u, v):
    out = dict(u)
    for i, x in v.items():
        s = out.get(i, 0) + x
        if s:
            out[i] = s
        else:
            out.pop(i, None)
    return out


def vec_scale(u, c):
    c = Fraction(c)
    if not c:
        return {}
    return {i: c * x for i, x in u.items()}


def vec_dot(u, v):
    if len(u) > len(v):
        u, v = v, u
    return sum((x * v[i] for i, x in u.items() if i in v), Fraction(0))


def vec_eq(u, v):
    return vec_add(u, vec_scale(v, -1)) == {}


class RatMatrix:
    """Sparse rational matrix.  Entries with value zero are never stored."""

    __slots__ = ("rows", "cols", "entries")

    def __init__(self, rows, cols, entries=None):
        self.rows = rows
        self.cols = cols
        self.entries = {}
        if entries:
            for (i, j), v in entries.items():
                self[i, j] = v

    def __getitem__(self, ij):
        return self.entries.get(ij, Fraction(0))

    def __setitem__(self, ij, v):
        i, j = ij
        if not (0 <= i < self.rows and 0 <= j < self.cols):
            raise DimensionMismatch(f"index {ij} out of shape {self.shape}")
        v = Fraction(v)
        if v:
            self.entries[ij] = v
        else:
            self.entries.pop(ij, None)

    @property
    def shape(self):
        return (self.rows, self.cols)

    def copy(self):
        m = RatMatrix(self.rows, self.cols)
        m.entries = dict(self.entries)
        return m

    @staticmethod
    def identity(n):
        m = RatMatrix(n, n)
        for i in range(n):
            m.entries[(i, i)] = Fraction(1)
        return m

    @staticmethod
    def zero(rows, cols):
        return RatMatrix(rows, cols)

    @staticmethod
    def from_rows(rows, ncols=None):
        """Build from a list of dense or sparse rows."""
        mat_rows = []
        width = ncols or 0
        for r in rows:
            if isinstance(r, dict):
                mat_rows.append({j: Fraction(v) for j, v in r.items() if v})
                if r:
                    width = max(width, max(r) + 1)
            else:
                mat_rows.append({j: Fraction(v) for j, v in enumerate(r) if v})
                width = max(width, len(r))
        m = RatMatrix(len(mat_rows), width if ncols is None else ncols)
        for i, r in enumerate(mat_rows):
            for j, v in r.items():
                m.entries[(i, j)] = v
        return m

    @staticmethod
    def from_columns(cols, nrows):
        m = RatMatrix(nrows, len(cols))
        for j, c in enumerate(cols):
            for i, v in c.items():
                if v:
                    m.entries[(i, j)] = Fraction(v)
        return m

    def row(self, i):
        return {j: v for (r, j), v in self.entries.items() if r == i}

    def column(self, j):
        return {i: v for (i, c), v in self.entries.items() if c == j}

    def sparse_rows(self):
        rows = [dict() for _ in range(self.rows)]
        for (i, j), v in self.entries.items():
            rows[i][j] = v
        return rows

    def transpose(self):
        m = RatMatrix(self.cols, self.rows)
        m.entries = {(j, i): v for (i, j), v in self.entries.items()}
        return m

    def matvec(self, v):
        out = {}
        for (i, j), a in self.entries.items():
            x = v.get(j)
            if x:
                s = out.get(i, 0) + a * x
                if s:
                    out[i] = s
                else:
                    out.pop(i, None)
        return out

    def __mul__(self, other):
        if isinstance(other, RatMatrix):
            if self.cols != other.rows:
                raise DimensionMismatch(f"{self.shape} * {other.shape}")
            by_row = other.sparse_rows()
            m = RatMatrix(self.rows, other.cols)
            acc = {}
            for (i, k), a in self.entries.items():
                for j, b in by_row[k].items():
                    key = (i, j)
                    acc[key] = acc.get(key, 0) + a * b
            m.entries = {k: v for k, v in acc.items() if v}
            return m
        return NotImplemented

    def __add__(self, other):
        if self.shape != other.shape:
            raise DimensionMismatch(f"{self.shape} + {other.shape}")
        m = self.copy()
        for k, v in other.entries.items():
            s = m.entries.get(k, 0) + v
            if s:
                m.entries[k] = s
            else:
                m.entries.pop(k, None)
        return m

    def __sub__(self, other):
        return self + other.scale(-1)

    def scale(self, c):
        c = Fraction(c)
        m = RatMatrix(self.rows, self.cols)
        if c:
            m.entries = {k: c * v for k, v in self.entries.items()}
        return m

    def is_zero(self):
        return not self.entries

    def __eq__(self, other):
        return (
            isinstance(other, RatMatrix)
            and self.shape == other.shape
            and self.entries == other.entries
        )

    def __repr__(self):
        return f"RatMatrix({self.rows}x{self.cols}, {len(self.entries)} nonzero)"

    def rank(self):
        piv, _ = _echelon(_int_rows(self.sparse_rows()))
        return len(piv)


# ---------------------------------------------------------------------------
# elimination core (integer, fraction-free)


def _int_rows(rows):
    """Clear denominators row-wise; content is divided out."""
    out = []
    for r in rows:
        if not r:
            out.append({})
            continue
        den = 1
        for v in r.values():
            den = den * v.denominator // gcd(den, v.denominator)
        ints = {j: int(v * den) for j, v in r.items()}
        g = 0
        for v in ints.values():
            g = gcd(g, v)
        if g > 1:
            ints = {j: v // g for j, v in ints.items()}
        out.append(ints)
    return out


def _echelon(rows, col_order=None):
    """Integer Gauss-Jordan elimination (fraction-free row combinations).

    Deterministic pivot rule: visit columns in `col_order` (default
    increasing); among unused rows with a nonzero entry in the current
    column pick the one with the smallest absolute value there, ties broken
    by row index.  Returns (pivots, rows); pivots is a list of (row, col)
    in elimination order, and each pivot column is zero in every other row.
    """
    rows = [dict(r) for r in rows]
    ncols = 0
    for r in rows:
        if r:
            ncols = max(ncols, max(r) + 1)
    order = list(col_order) if col_order is not None else list(range(ncols))
    used = set()
    pivots = []
    for col in order:
        best = None
        for i, r in enumerate(rows):
            if i in used:
                continue
            v = r.get(col)
            if v:
                key = (abs(v), i)
                if best is None or key < best[0]:
                    best = (key, i)
        if best is None:
            continue
        p = best[1]
        used.add(p)
        pivots.append((p, col))
        pv = rows[p][col]
        prow = rows[p]
        for i, r in enumerate(rows):
            if i == p or col not in r:
                continue
            rv = r[col]
            new = {j: v * pv for j, v in r.items()}
            for j, v in prow.items():
                s = new.get(j, 0) - rv * v
                if s:
                    new[j] = s
                else:
                    new.pop(j, None)
            g = 0
            for v in new.values():
                g = gcd(g, v)
            if g > 1:
                new = {j: v // g for j, v in new.items()}
            rows[i] = new
    return pivots, rows


def _kernel_int(rows, ncols, col_order=None):
    """Kernel basis of the integer row system, one vector per free column."""
    pivots, red = _echelon(rows, col_order)
    pivot_cols = {c for _, c in pivots}
    free = [j for j in range(ncols) if j not in pivot_cols]
    basis = []
    for f in free:
        v = {f: Fraction(1)}
        for r, c in pivots:
            row = red[r]
            s = sum(
                (Fraction(val) * v[j] for j, val in row.items() if j in v and j != c),
                Fraction(0),
            )
            if s:
                v[c] = -s / row[c]
        basis.append({j: x for j, x in v.items() if x})
    return basis


def _primitive(v):
    """Scale a rational vector to primitive integer form (first nonzero > 0)."""
    if not v:
        return {}
    den = 1
    for x in v.values():
        den = den * x.denominator // gcd(den, x.denominator)
    ints = {j: int(x * den) for j, x in v.items()}
    g = 0
    for x in ints.values():
        g = gcd(g, x)
    if g > 1:
        ints = {j: x // g for j, x in ints.items()}
    lead = min(ints)
    if ints[lead] < 0:
        ints = {j: -x for j, x in ints.items()}
    return {j: Fraction(x) for j, x in ints.items()}


class Echelonizer:
    """Incremental row-echelon structure over Q for membership testing.

    Rows are kept pivot-normalized; `residue` reduces a vector against the
    current rows, `add` inserts its residue if nonzero.
    """

    def __init__(self):
        self.rows = {}  # pivot col -> normalized row

    def residue(self, v):
        v = {j: Fraction(x) for j, x in v.items() if x}
        while v:
            c = min(v)
            row = self.rows.get(c)
            if row is None:
                return v, c
            v = vec_add(v, vec_scale(row, -v[c]))
        return {}, None

    def add(self, v):
        r, c = self.residue(v)
        if not r:
            return False
        self.rows[c] = vec_scale(r, Fraction(1) / r[c])
        return True

    def contains(self, v):
        r, _ = self.residue(v)
        return not r


class Subspace:
    """A subspace of Q^ambient_dim given by an independent list of sparse
    column vectors."""

    __slots__ = ("ambient_dim", "basis", "_ech")

    def __init__(self, ambient_dim, basis, check=True):
        self.ambient_dim = ambient_dim
        self.basis = [{i: Fraction(x) for i, x in b.items() if x} for b in basis]
        self._ech = None
        if check and self.basis:
            ech = self._echelonizer()
            if len(ech.rows) != len(self.basis):
                raise LinalgError("basis vectors are linearly dependent")

    def _echelonizer(self):
        if self._ech is None:
            ech = Echelonizer()
            for b in self.basis:
                ech.add(b)
            self._ech = ech
        return self._ech

    @property
    def dim(self):
        return len(self.basis)

    @staticmethod
    def zero(ambient_dim):
        return Subspace(ambient_dim, [])

    @staticmethod
    def full(ambient_dim):
        return Subspace(
            ambient_dim, [{i: Fraction(1)} for i in range(ambient_dim)], check=False
        )

    def matrix(self):
        return RatMatrix.from_columns(self.basis, self.ambient_dim)

    def contains(self, v):
        return self._echelonizer().contains(v)

    def contains_subspace(self, other):
        if other.ambient_dim != self.ambient_dim:
            raise DimensionMismatch("ambient dimensions differ")
        ech = self._echelonizer()
        return all(ech.contains(b) for b in other.basis)

    def sum(self, other):
        if other.ambient_dim != self.ambient_dim:
            raise DimensionMismatch("ambient dimensions differ")
        return column_span(self.basis + other.basis, self.ambient_dim)

    def intersect(self, other):
        # v = A x = B y: kernel of the column-glued system [A | -B].
        if other.ambient_dim != self.ambient_dim:
            raise DimensionMismatch("ambient dimensions differ")
        na, nb = self.dim, other.dim
        if na == 0 or nb == 0:
            return Subspace.zero(self.ambient_dim)
        rows = [dict() for _ in range(self.ambient_dim)]
        for j, b in enumerate(self.basis):
            for i, v in b.items():
                rows[i][j] = v
        for j, b in enumerate(other.basis):
            for i, v in b.items():
                rows[i][na + j] = -v
        ker = _kernel_int(_int_rows(rows), na + nb)
        out = []
        for k in ker:
            v = {}
            for j in range(na):
                c = k.get(j)
                if c:
                    v = vec_add(v, vec_scale(self.basis[j], c))
            if v:
                out.append(_primitive(v))
        return column_span(out, self.ambient_dim)

    def __eq__(self, other):
        return (
            isinstance(other, Subspace)
            and self.ambient_dim == other.ambient_dim
            and self.dim == other.dim
            and self.contains_subspace(other)
        )

    def __repr__(self):
        return f"Subspace(dim {self.dim} of Q^{self.ambient_dim})"


def column_span(columns, ambient_dim):
    """Deterministic independent subset spanning the given columns."""
    out = []
    ech = Echelonizer()
    for c in columns:
        if c and ech.add(c):
            out.append(_primitive(c))
    return Subspace(ambient_dim, out, check=False)


def kernel_basis(m: RatMatrix) -> Subspace:
    """Basis of {v : m v = 0}."""
    ker = _kernel_int(_int_rows(m.sparse_rows()), m.cols)
    return Subspace(m.cols, [_primitive(v) for v in ker], check=False)


def image_basis(m: RatMatrix) -> Subspace:
    """Basis of the column space of m (original columns at pivot positions)."""
    piv, _ = _echelon(_int_rows(m.transpose().sparse_rows()))
    keep = sorted(r for r, _ in piv)
    return Subspace(m.rows, [_primitive(m.column(j)) for j in keep], check=False)


def solve(m: RatMatrix, b) -> dict | None:
    """One solution of m x = b, or None.  b is a sparse vector."""
    rows = m.sparse_rows()
    aug = []
    for i, r in enumerate(rows):
        rr = dict(r)
        v = Fraction(b.get(i, 0))
        if v:
            rr[m.cols] = v
        aug.append(rr)
    pivots, red = _echelon(_int_rows(aug), col_order=list(range(m.cols)))
    x = {}
    for r, c in pivots:
        row = red[r]
        s = sum(
            (
                Fraction(val) * x[j]
                for j, val in row.items()
                if j in x and j != c and j != m.cols
            ),
            Fraction(0),
        )
        x[c] = (Fraction(row.get(m.cols, 0)) - s) / Fraction(row[c])
    x = {j: v for j, v in x.items() if v}
    if not vec_eq(m.matvec(x), {i: Fraction(v) for i, v in b.items() if v}):
        return None
    return x


def coordinates_in(basis_matrix: RatMatrix, v):
    """Coordinates of v in the columns of basis_matrix (raises if absent)."""
    x = solve(basis_matrix, v)
    if x is None:
        raise SubspaceNotContained("vector not in span")
    return x


def quotient(ambient: Subspace, sub: Subspace):
    """Complement C with sub + C = ambient, plus the projection (as a matrix
    on the ambient coordinate space) that kills sub and fixes C pointwise.

    Containment of sub in ambient is decided by solving, not by comparing
    bases.
    """
    if sub.ambient_dim != ambient.ambient_dim:
        raise DimensionMismatch("ambient dimensions differ")
    if not ambient.contains_subspace(sub):
        raise SubspaceNotContained("sub is not inside ambient")
    ech = Echelonizer()
    for b in sub.basis:
        ech.add(b)
    chosen = list(sub.basis)
    complement = []
    for cand in ambient.basis:
        if ech.add(cand):
            chosen.append(cand)
            complement.append(cand)
    comp = Subspace(ambient.ambient_dim, complement, check=False)
    n = ambient.ambient_dim
    k = len(chosen)
    proj = RatMatrix(n, n)
    if complement:
        bmat = RatMatrix.from_columns(chosen, n)
        e = _left_inverse(bmat)
        cmat = RatMatrix.from_columns(complement, n)
        sel = RatMatrix(len(complement), k)
        for i in range(len(complement)):
            sel[i, sub.dim + i] = 1
        proj = cmat * sel * e
    return comp, proj


def _left_inverse(m: RatMatrix) -> RatMatrix:
    """E with E m = I for a full-column-rank m (deterministic)."""
    rows = m.sparse_rows()
    aug = []
    for i, r in enumerate(rows):
        rr = dict(r)
        rr[m.cols + i] = Fraction(1)
        aug.append(rr)
    pivots, red = _echelon(_int_rows(aug), col_order=list(range(m.cols)))
    if len(pivots) != m.cols:
        raise LinalgError("matrix does not have full column rank")
    piv_cols = [c for _, c in pivots]
    frac_rows = [{j: Fraction(v) for j, v in red[r].items()} for r, _ in pivots]
    for a in range(len(frac_rows)):
        pv = frac_rows[a][piv_cols[a]]
        frac_rows[a] = {j: v / pv for j, v in frac_rows[a].items()}
    # pivot columns are already exclusive after full elimination
    e = RatMatrix(m.cols, m.rows)
    for a, c in enumerate(piv_cols):
        for j, v in frac_rows[a].items():
            if j >= m.cols and v:
                e[c, j - m.cols] = v
    return e


class PairingForm:
    """Bilinear pairing between Q^left_dim and Q^right_dim.

    symmetry_tag is bookkeeping ('none', 'graded-symmetric',
    'graded-antisymmetric'); ghost is the declared total ghost number of the
    pairing (-1 for bulk BV forms, 0 for boundary BFV forms).
    """

    __slots__ = ("left_dim", "right_dim", "matrix", "symmetry_tag", "ghost")

    def __init__(self, left_dim, right_dim, matrix, symmetry_tag="none", ghost=None):
        if matrix.shape != (left_dim, right_dim):
            raise DimensionMismatch("pairing matrix shape mismatch")
        self.left_dim = left_dim
        self.right_dim = right_dim
        self.matrix = matrix
        self.symmetry_tag = symmetry_tag
        self.ghost = ghost

    def value(self, u, v):
        return vec_dot(u, self.matrix.matvec(v))

    def is_square(self):
        return self.left_dim == self.right_dim

    def nondegenerate(self):
        if self.left_dim != self.right_dim:
            return False
        return self.matrix.rank() == self.left_dim

    def __repr__(self):
        return f"PairingForm({self.left_dim}x{self.right_dim}, {self.symmetry_tag})"


def orthogonal_complement(p: PairingForm, side: str, s: Subspace) -> Subspace:
    """{v : p(v, s) = 0} for side='left', {v : p(s, v) = 0} for side='right'."""
    if side not in ("left", "right"):
        raise ValueError("side must be 'left' or 'right'")
    dim = p.left_dim if side == "left" else p.right_dim
    sdim = p.right_dim if side == "left" else p.left_dim
    if s.ambient_dim != sdim:
        raise DimensionMismatch("subspace does not live in the paired space")
    if s.dim == 0:
        return Subspace.full(dim)
    rows = []
    for b in s.basis:
        if side == "left":
            rows.append(p.matrix.matvec(b))  # condition v . (M b) = 0
        else:
            rows.append(p.matrix.transpose().matvec(b))  # condition (M^T b) . v = 0
    cond = RatMatrix.from_rows(rows, ncols=dim)
    return kernel_basis(cond)


def two_sided_complement(p: PairingForm, s: Subspace) -> Subspace:
    """{v : p(v,s)=0 and p(s,v)=0}; coincides with the one-sided complement
    for (anti)symmetric pairings but is also meaningful without symmetry."""
    if not p.is_square():
        raise DimensionMismatch("two-sided complement needs a square pairing")
    left = orthogonal_complement(p, "left", s)
    right = orthogonal_complement(p, "right", s)
    return left.intersect(right)


def classify_subspace(p: PairingForm, s: Subspace):
    """Isotropic / coisotropic / lagrangian verdicts for s against a square
    pairing (lagrangian = both; no dimension count)."""
    if not p.is_square():
        raise DimensionMismatch("classification needs a pairing of a space with itself")
    if s.ambient_dim != p.left_dim:
        raise DimensionMismatch("subspace does not live in the paired space")
    perp = two_sided_complement(p, s)
    isotropic = perp.contains_subspace(s)
    coisotropic = s.contains_subspace(perp)
    return {
        "isotropic": isotropic,
        "coisotropic": coisotropic,
        "lagrangian": isotropic and coisotropic,
    }


def presymplectic_reduce(p: PairingForm, sub: Subspace):
    """Quotient W' = W / ker(p) with the induced nondegenerate pairing and
    the image of `sub`, re-verifying the isotropy/Lagrangianity transfer
    facts (including the lifting clause when ker(p) is inside sub)."""
    if not p.is_square():
        raise DimensionMismatch("presymplectic reduction needs a square pairing")
    n = p.left_dim
    if sub.ambient_dim != n:
        raise DimensionMismatch("subspace does not live in the paired space")
    kernel = two_sided_complement(p, Subspace.full(n))
    comp, proj = quotient(Subspace.full(n), kernel)
    k = comp.dim
    red = RatMatrix(k, k)
    for i in range(k):
        for j in range(k):
            red[i, j] = p.value(comp.basis[i], comp.basis[j])
    red_pairing = PairingForm(k, k, red, p.symmetry_tag, p.ghost)
    imgs = []
    if k:
        e = _left_inverse(comp.matrix())
        for b in sub.basis:
            imgs.append(e.matvec(proj.matvec(b)))
    red_sub = column_span(imgs, k)
    before = classify_subspace(p, sub)
    after = (
        classify_subspace(red_pairing, red_sub)
        if k
        else {"isotropic": True, "coisotropic": True, "lagrangian": True}
    )
    kernel_in_sub = sub.contains_subspace(kernel)
    facts = {
        "reduced_nondegenerate": red_pairing.nondegenerate() if k else True,
        "isotropy_matches": before["isotropic"] == after["isotropic"],
        "lagrangian_descends": (not before["lagrangian"]) or after["lagrangian"],
        "lagrangian_lifts": (not (after["lagrangian"] and kernel_in_sub))
        or before["lagrangian"],
    }
    return {
        "kernel": kernel,
        "reduced_dim": k,
        "reduced_pairing": red_pairing,
        "reduced_sub": red_sub,
        "projection": proj,
        "complement": comp,
        "facts": facts,
    }
