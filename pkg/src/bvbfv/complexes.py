"""Cochain complexes, chain maps, cohomology with stored representatives,
long exact sequences of pairs, and ghost-number bookkeeping for shifted sums.
"""

from __future__ import annotations

from .linalg import (
    RatMatrix,
    Subspace,
    image_basis,
    kernel_basis,
    quotient,
    solve,
)


class ComplexError(Exception):
    pass


class NotShortExact(ComplexError):
    pass


class GhostMismatch(ComplexError):
    pass


class CochainComplex:
    """Finite cochain complex: components k -> dimension, differentials
    d_k : C^k -> C^{k+1}.  d.d = 0 is checked exactly on construction."""

    def __init__(self, components, differentials, labels=None, check=True):
        self.components = {k: int(d) for k, d in components.items() if d}
        self.differentials = {}
        for k, m in differentials.items():
            if m is not None and not (m.rows == 0 and m.cols == 0):
                self.differentials[k] = m
        self.labels = labels or {}
        if check:
            self._validate()

    def _validate(self):
        for k, m in self.differentials.items():
            if m.cols != self.dim(k) or m.rows != self.dim(k + 1):
                raise ComplexError(f"differential d_{k} has shape {m.shape}, "
                                   f"expected {self.dim(k+1)}x{self.dim(k)}")
        for k in self.differentials:
            if k + 1 in self.differentials:
                if not (self.differentials[k + 1] * self.differentials[k]).is_zero():
                    raise ComplexError(f"d_{k+1} d_{k} != 0")

    def degrees(self):
        return sorted(self.components)

    def dim(self, k):
        return self.components.get(k, 0)

    def d(self, k):
        m = self.differentials.get(k)
        if m is None:
            return RatMatrix.zero(self.dim(k + 1), self.dim(k))
        return m

    def euler_characteristic(self):
        return sum((-1) ** k * d for k, d in self.components.items())

    def cohomology(self, k, variant="default"):
        """(dimension, representative cocycles) of H^k.

        `variant='alt'` sweeps the kernel basis in the opposite order when
        picking representatives; used to certify representative-independence
        of induced maps.
        """
        ker = kernel_basis(self.d(k))
        if self.dim(k) == 0:
            return 0, []
        im = image_basis(self.d(k - 1)) if self.dim(k - 1) else Subspace.zero(self.dim(k))
        if variant == "alt":
            ker = Subspace(ker.ambient_dim, list(reversed(ker.basis)), check=False)
        comp, _ = quotient(ker, im)
        return comp.dim, comp.basis

    def betti(self):
        return {k: self.cohomology(k)[0] for k in self.degrees()}

    def class_coordinates(self, k, cocycle, reps):
        """Coordinates of a cocycle's class in the representative basis."""
        nreps = len(reps)
        im = image_basis(self.d(k - 1)) if self.dim(k - 1) else Subspace.zero(self.dim(k))
        cols = list(reps) + list(im.basis)
        mat = RatMatrix.from_columns(cols, self.dim(k))
        x = solve(mat, cocycle)
        if x is None:
            raise ComplexError("vector is not a cocycle class in the given basis")
        return {j: v for j, v in x.items() if j < nreps}

    def __repr__(self):
        dims = {k: self.dim(k) for k in self.degrees()}
        return f"CochainComplex({dims})"


class ChainMap:
    """Degree-preserving map of cochain complexes, one block per degree.
    Commutation with the differentials is checked exactly."""

    def __init__(self, source, target, blocks, check=True):
        self.source = source
        self.target = target
        self.blocks = dict(blocks)
        if check:
            self._validate()

    def _validate(self):
        for k in set(self.source.degrees()) | set(self.target.degrees()):
            f_k = self.block(k)
            f_k1 = self.block(k + 1)
            left = self.target.d(k) * f_k
            right = f_k1 * self.source.d(k)
            if left != right:
                raise ComplexError(f"chain map fails to commute with d at degree {k}")

    def block(self, k):
        m = self.blocks.get(k)
        if m is None:
            return RatMatrix.zero(self.target.dim(k), self.source.dim(k))
        return m

    def apply(self, k, v):
        return self.block(k).matvec(v)


class ExactSequenceReport:
    """A finite sequence of spaces and maps with per-node exactness verdicts."""

    def __init__(self, nodes, maps, verdicts):
        self.nodes = nodes      # list of (name, dim)
        self.maps = maps        # list of RatMatrix, maps[i]: nodes[i] -> nodes[i+1]
        self.verdicts = verdicts  # exactness at nodes[1..-2]; verdicts[i] is node i+1

    @property
    def exact(self):
        return all(self.verdicts)

    def summary(self):
        return {
            "nodes": [{"name": n, "dim": d} for n, d in self.nodes],
            "exact_at": {self.nodes[i + 1][0]: bool(v) for i, v in enumerate(self.verdicts)},
            "exact": self.exact,
        }

    def __repr__(self):
        chain = " -> ".join(f"{n}({d})" for n, d in self.nodes)
        return f"ExactSequence[{chain}] exact={self.exact}"


def verify_exactness(nodes, maps):
    """Exactness (Im = ker) at every interior node of a sequence.

    nodes: list of (name, dim); maps[i]: Q^{dim_i} -> Q^{dim_{i+1}}.  The
    sequence is treated as starting and ending at zero.
    """
    verdicts = []
    for i in range(1, len(nodes) - 1):
        inc = maps[i - 1]
        out = maps[i]
        img = image_basis(inc)
        ker = kernel_basis(out)
        verdicts.append(img == ker)
    return verdicts


def _check_pair(rel_inclusion: ChainMap, restriction: ChainMap):
    rel = rel_inclusion.source
    absc = rel_inclusion.target
    bdry = restriction.target
    if restriction.source is not absc:
        raise NotShortExact("restriction must start at the absolute complex")
    degrees = sorted(set(absc.degrees()) | set(rel.degrees()) | set(bdry.degrees()))
    for k in degrees:
        inc = rel_inclusion.block(k)
        res = restriction.block(k)
        if not (res * inc).is_zero():
            raise NotShortExact(f"restriction o inclusion nonzero in degree {k}")
        if kernel_basis(inc).dim != 0:
            raise NotShortExact(f"relative inclusion not injective in degree {k}")
        if image_basis(res).dim != bdry.dim(k):
            raise NotShortExact(f"restriction not surjective in degree {k}")
        if image_basis(inc) != kernel_basis(res):
            raise NotShortExact(f"sequence not exact in the middle in degree {k}")
    return rel, absc, bdry, degrees


def _connecting_block(rel, absc, bdry, rel_inclusion, restriction, k,
                      bdry_reps, rel_reps_next, variant="default"):
    """Matrix of the zig-zag H^k(bdry) -> H^{k+1}(rel) in the given bases."""
    rows = len(rel_reps_next)
    cols = len(bdry_reps)
    out = RatMatrix(rows, cols)
    for j, y in enumerate(bdry_reps):
        x = solve(restriction.block(k).copy(), y)
        if x is None:
            raise NotShortExact("restriction not surjective on a cocycle")
        dx = absc.d(k).matvec(x)
        z = solve(rel_inclusion.block(k + 1).copy(), dx)
        if z is None:
            raise ComplexError("zig-zag failed: dx is not a relative cochain")
        coords = rel.class_coordinates(k + 1, z, rel_reps_next)
        for i, v in coords.items():
            out[i, j] = v
    return out


def _induced_block(source_cx, target_cx, cmap, k, source_reps, target_reps):
    rows = len(target_reps)
    out = RatMatrix(rows, len(source_reps))
    for j, r in enumerate(source_reps):
        img = cmap.apply(k, r)
        coords = target_cx.class_coordinates(k, img, target_reps)
        for i, v in coords.items():
            out[i, j] = v
    return out


def les_of_pair(rel_inclusion: ChainMap, restriction: ChainMap, variant="default"):
    """Long exact sequence of the pair from the per-degree short exact
    sequence rel -> abs -> bdry, with the connecting map built by zig-zag.
    Exactness is verified at every node."""
    rel, absc, bdry, degrees = _check_pair(rel_inclusion, restriction)
    kmin, kmax = degrees[0], degrees[-1]
    reps = {}
    for k in range(kmin, kmax + 2):
        reps[("rel", k)] = rel.cohomology(k, variant)[1]
        reps[("abs", k)] = absc.cohomology(k, variant)[1]
        reps[("bdry", k)] = bdry.cohomology(k, variant)[1]
    nodes = []
    maps = []
    for k in range(kmin, kmax + 1):
        nodes.append((f"H^{k}(rel)", len(reps[("rel", k)])))
        maps.append(_induced_block(rel, absc, rel_inclusion, k,
                                   reps[("rel", k)], reps[("abs", k)]))
        nodes.append((f"H^{k}(abs)", len(reps[("abs", k)])))
        maps.append(_induced_block(absc, bdry, restriction, k,
                                   reps[("abs", k)], reps[("bdry", k)]))
        nodes.append((f"H^{k}(bdry)", len(reps[("bdry", k)])))
        maps.append(_connecting_block(rel, absc, bdry, rel_inclusion, restriction,
                                      k, reps[("bdry", k)], reps[("rel", k + 1)]))
    nodes.append((f"H^{kmax+1}(rel)", len(reps[("rel", kmax + 1)])))
    verdicts = verify_exactness(nodes, maps)
    return ExactSequenceReport(nodes, maps, verdicts)


def connecting_map(rel_inclusion: ChainMap, restriction: ChainMap, k):
    """Connecting homomorphism H^k(bdry) -> H^{k+1}(rel).

    Recomputed with a second choice of representatives; the two matrices must
    agree after change of basis, certifying independence of choices.
    """
    rel, absc, bdry, _ = _check_pair(rel_inclusion, restriction)
    b_reps = bdry.cohomology(k)[1]
    r_reps = rel.cohomology(k + 1)[1]
    beta = _connecting_block(rel, absc, bdry, rel_inclusion, restriction, k,
                             b_reps, r_reps)
    b_alt = bdry.cohomology(k, "alt")[1]
    beta_alt = _connecting_block(rel, absc, bdry, rel_inclusion, restriction, k,
                                 b_alt, r_reps)
    # express alt basis in the default basis and compare
    change = RatMatrix(len(b_reps), len(b_alt))
    for j, y in enumerate(b_alt):
        for i, v in bdry.class_coordinates(k, y, b_reps).items():
            change[i, j] = v
    if beta * change != beta_alt:
        raise ComplexError("connecting map depends on representative choice")
    return beta


class ShiftedSum:
    """Bigraded field space: named sectors with integer shifts; a component
    of form degree k in a shift-s sector has ghost number s - k.

    Differential blocks map slot (sector, k) -> slot (sector', k'); the total
    differential acts with ghost number +1 on coordinate functions, i.e. it
    lowers the field ghost number by exactly one.
    """

    def __init__(self, slots, diff_blocks=None):
        # slots: dict (sector, k) -> dim; sector shifts: dict sector -> shift
        self.slots = {}
        self.shifts = {}
        for (sector, shift, k), dim in slots.items():
            if sector in self.shifts and self.shifts[sector] != shift:
                raise GhostMismatch(f"sector {sector} declared with two shifts")
            self.shifts[sector] = shift
            if dim:
                self.slots[(sector, k)] = dim
        self.diff_blocks = dict(diff_blocks or {})

    def ghost(self, sector, k):
        return self.shifts[sector] - k

    def slot_dims(self):
        return dict(self.slots)


def verify_ghost_grading(s: ShiftedSum, pairing_blocks=None, pairing_ghost=None):
    """Check the ghost bookkeeping of a shifted sum.

    Every differential block must lower the field ghost number by one (the
    convention in which the differential has ghost number +1 as a derivation
    of the coordinate functions).  Optional pairing blocks
    [((sector,k),(sector',k')), ...] must couple ghosts summing to
    `pairing_ghost`.  Raises GhostMismatch naming the offending pair.
    """
    for (src, dst), block in s.diff_blocks.items():
        if block.is_zero():
            continue
        g_src = s.ghost(*src)
        g_dst = s.ghost(*dst)
        if g_dst != g_src - 1:
            raise GhostMismatch(
                f"differential block {src} -> {dst} shifts ghost {g_src} -> {g_dst}"
            )
    if pairing_blocks:
        for a, b in pairing_blocks:
            g = s.ghost(*a) + s.ghost(*b)
            if g != pairing_ghost:
                raise GhostMismatch(
                    f"pairing couples {a} (gh {s.ghost(*a)}) with {b} "
                    f"(gh {s.ghost(*b)}), total {g} != {pairing_ghost}"
                )
    return True
