"""Cutting and gluing: simplicial gluing of two complexes along identified
boundary subcomplexes, fiber products of Euler-Lagrange spaces, intrinsic
reconstruction of the symplectic moduli of the glued theory, and both
Mayer-Vietoris long exact sequences.
"""

from __future__ import annotations

from fractions import Fraction

from .complexes import ExactSequenceReport, verify_exactness
from .linalg import (
    RatMatrix,
    Subspace,
    column_span,
    kernel_basis,
    quotient,
    solve,
)
from .moduli import ReducedModel, _GradedPiece, _restrict, symp_moduli
from .simplicial import IncoherentOrientation, OrientedComplex, _perm_sign
from .theories import LinearTheory


class GluingError(Exception):
    pass


class InterfaceMismatch(GluingError):
    pass


class OrientationClash(GluingError):
    pass


class GluingSpec:
    """Two complexes and an orientation-reversing identification of a left
    boundary subcomplex with a right one, given as vertex pairs."""

    def __init__(self, left: OrientedComplex, right: OrientedComplex, interface_map):
        self.left = left
        self.right = right
        self.pairs = [(l, r) for l, r in interface_map]
        if len({l for l, _ in self.pairs}) != len(self.pairs):
            raise InterfaceMismatch("left interface vertices repeat")
        if len({r for _, r in self.pairs}) != len(self.pairs):
            raise InterfaceMismatch("right interface vertices repeat")
        self.l_of_r = {r: l for l, r in self.pairs}
        self._validate()

    def _validate(self):
        lb = self.left.boundary_complex()
        rb = self.right.boundary_complex()
        lset = {l for l, _ in self.pairs}
        rset = {r for _, r in self.pairs}
        if not lset <= set(lb.vertex_ids):
            raise InterfaceMismatch("left interface vertices are not boundary vertices")
        if not rset <= set(rb.vertex_ids):
            raise InterfaceMismatch("right interface vertices are not boundary vertices")
        self.left_faces = {}
        self.right_faces = {}
        n1 = self.left.dimension - 1
        lfaces = {
            self.left.face_vertices(f)
            for f in self.left.boundary_faces()
            if set(self.left.face_vertices(f)) <= lset
        }
        rfaces = {
            self.right.face_vertices(f)
            for f in self.right.boundary_faces()
            if set(self.right.face_vertices(f)) <= rset
        }
        mapped = {tuple(sorted((self.l_of_r[v] for v in f), key=self._lkey))
                  for f in rfaces}
        lcanon = {tuple(sorted(f, key=self._lkey)) for f in lfaces}
        if mapped != lcanon:
            raise InterfaceMismatch(
                "identified boundary subcomplexes are not simplicially isomorphic"
            )
        if not lcanon:
            # empty interface is allowed (disjoint union)
            pass

    def _lkey(self, v):
        return self.left.vertex_position(v)

    def interface_complex(self):
        """The interface as a complex with the orientation induced from the
        left piece."""
        lset = {l for l, _ in self.pairs}
        faces = []
        signs = []
        for f, s in self.left.boundary_faces().items():
            verts = self.left.face_vertices(f)
            if set(verts) <= lset:
                faces.append(list(verts))
                signs.append(int(s))
        verts = sorted({v for f in faces for v in f}, key=self._lkey)
        dim = self.left.dimension - 1
        return OrientedComplex(dim, verts, faces, signs)


def glue(spec: GluingSpec):
    """Glued oriented complex; raises OrientationClash if the interface
    identification does not reverse the induced boundary orientations."""
    left, right = spec.left, spec.right
    lmap = {v: f"L:{v}" for v in left.vertex_ids}
    rmap = {}
    for v in right.vertex_ids:
        rmap[v] = lmap[spec.l_of_r[v]] if v in spec.l_of_r else f"R:{v}"
    vertices = [lmap[v] for v in left.vertex_ids] + [
        rmap[v] for v in right.vertex_ids if v not in spec.l_of_r
    ]
    tops = [[lmap[v] for v in left.face_vertices(t)] for t in left.top]
    signs = [int(s) for s in left.top.values()]
    tops += [[rmap[v] for v in right.face_vertices(t)] for t in right.top]
    signs += [int(s) for s in right.top.values()]
    try:
        cx = OrientedComplex(left.dimension, vertices, tops, signs)
    except IncoherentOrientation as e:
        raise OrientationClash(
            f"interface identification does not reverse orientation: {e}"
        )
    cx.meta = {"left_map": lmap, "right_map": rmap, "spec": spec}
    return cx


def face_map_matrix(src: OrientedComplex, dst: OrientedComplex, k, vmap):
    """Pullback of k-cochains along a vertex map dst <- src... precisely:
    the matrix of the map C^k(src) -> C^k(dst) sending the indicator of a
    face to +-1 times the indicator of its image, with the permutation sign
    of the image ordering."""
    m = RatMatrix(dst.n_faces(k), src.n_faces(k))
    for f in src.faces(k):
        verts = src.face_vertices(f)
        imgs = [vmap[v] for v in verts]
        pos = [dst.vertex_position(v) for v in imgs]
        sgn = _perm_sign(pos)
        if sgn is None:
            raise GluingError("vertex map collapses a face")
        m[dst.face_index(k, tuple(sorted(pos))), src.face_index(k, f)] = sgn
    return m


def restriction_to_subcomplex(big: OrientedComplex, small: OrientedComplex, k, vmap):
    """C^k(big) -> C^k(small) along the embedding small -> big given by vmap
    (small vertex -> big vertex)."""
    m = RatMatrix(small.n_faces(k), big.n_faces(k))
    for f in small.faces(k):
        verts = small.face_vertices(f)
        imgs = [vmap[v] for v in verts]
        pos = [big.vertex_position(v) for v in imgs]
        sgn = _perm_sign(pos)
        m[small.face_index(k, f), big.face_index(k, tuple(sorted(pos)))] = sgn
    return m


def _bulk_restriction(t_big: LinearTheory, t_small: LinearTheory, vmap):
    """Flat restriction of cup-model bulk fields of the glued theory to a
    piece (both theories must have pure cochain sectors)."""
    m = RatMatrix(t_small.bulk.total, t_big.bulk.total)
    for slot in t_small.bulk.slots:
        sec, k = slot["sector"], slot["degree"]
        if not t_big.bulk.has(sec, k):
            continue
        block = restriction_to_subcomplex(t_big.cx, t_small.cx, k, vmap)
        r0 = t_small.bulk.offset(sec, k)
        c0 = t_big.bulk.offset(sec, k)
        for (i, j), v in block.entries.items():
            m[r0 + i, c0 + j] = v
    return m


def _interface_restriction(t: LinearTheory, iface: OrientedComplex, vmap):
    """Flat restriction of cup-model bulk fields to interface cochains,
    stacked per sector and degree (vmap: interface vertex -> bulk vertex)."""
    blocks = []
    total = 0
    offsets = {}
    for slot in t.bulk.slots:
        sec, k = slot["sector"], slot["degree"]
        if k > iface.dimension:
            continue
        offsets[(sec, k)] = total
        total += iface.n_faces(k)
    m = RatMatrix(total, t.bulk.total)
    for slot in t.bulk.slots:
        sec, k = slot["sector"], slot["degree"]
        if k > iface.dimension:
            continue
        block = restriction_to_subcomplex(t.cx, iface, k, vmap)
        r0 = offsets[(sec, k)]
        c0 = t.bulk.offset(sec, k)
        for (i, j), v in block.entries.items():
            m[r0 + i, c0 + j] = v
    return m, offsets, total


def _cotangent_interface(t: LinearTheory, spec: GluingSpec, side):
    """Interface observables of a cotangent theory: boundary-field rows of
    pi supported on interface faces, in a left-labelled canonical order.
    Flux-type rows from the right piece carry the orientation-reversal sign."""
    iface_verts = {l for l, _ in spec.pairs} if side == "left" else \
        {r for _, r in spec.pairs}
    to_left = (lambda v: v) if side == "left" else \
        {r: l for l, r in spec.pairs}.__getitem__
    lkey = spec.left.vertex_position
    bc = t.cx.boundary_complex()
    flux = t.meta.get("bdry_flux_sectors", set())
    rows = {}
    off = 0
    for slot in t.bdry.slots:
        sec, k = slot["sector"], slot["degree"]
        for i, f in enumerate(bc.faces(k)):
            verts = bc.face_vertices(f)
            if not set(verts) <= iface_verts:
                continue
            key_verts = [to_left(v) for v in verts]
            pos = [lkey(v) for v in key_verts]
            sgn = _perm_sign(pos)
            if side == "right" and sec in flux:
                sgn = -sgn
            key = (sec, k, tuple(sorted(pos)))
            rows[key] = (off + i, sgn)
        off += slot["dim"]
    keys = sorted(rows, key=str)
    m = RatMatrix(len(keys), t.bulk.total)
    for r, key in enumerate(keys):
        src_row, sgn = rows[key]
        for (i, j), v in t.pi.entries.items():
            if i == src_row:
                m[r, j] = sgn * v
    return m, len(keys)


def _gh0_kernel(t: LinearTheory):
    idx0 = t.bulk.ghost_indices(0)
    idxm1 = t.bulk.ghost_indices(-1)
    block = _restrict(t.Q, idxm1, idx0)
    ker = kernel_basis(block)
    return Subspace(
        t.bulk.total,
        [{idx0[i]: v for i, v in b.items()} for b in ker.basis],
        check=False,
    )


def fiber_product_check(t_glued, t_left, t_right, spec: GluingSpec, glued_cx=None):
    """dim EL of the glued theory equals the dimension of the fiber product
    of the pieces' EL spaces over the interface fields.

    Cup-model theories are compared in all ghost numbers (cochain fields are
    single-valued at the interface by construction).  Cotangent models are
    compared in the ghost-zero sector: their chain-model antifield homes
    carry interface-supported coordinates whose identification is a quotient
    rather than a matching condition, so only the classical sector has a
    discrete fiber-product statement.
    """
    glued_cx = glued_cx or t_glued.cx
    iface = spec.interface_complex()
    if t_left.model == "cotangent":
        el_n = _gh0_kernel(t_glued).dim
        el_l = _gh0_kernel(t_left)
        el_r = _gh0_kernel(t_right)
        rho_l, wdim = _cotangent_interface(t_left, spec, "left")
        rho_r, wdim2 = _cotangent_interface(t_right, spec, "right")
    else:
        el_n = kernel_basis(t_glued.Q).dim
        el_l = kernel_basis(t_left.Q)
        el_r = kernel_basis(t_right.Q)
        lmapv = {v: v for v in iface.vertex_ids}
        r_of_l = {l: r for l, r in spec.pairs}
        rmapv = {v: r_of_l[v] for v in iface.vertex_ids}
        rho_l, _, wdim = _interface_restriction(t_left, iface, lmapv)
        rho_r, _, wdim2 = _interface_restriction(t_right, iface, rmapv)
    if wdim != wdim2:
        raise GluingError("interface field spaces disagree")
    na, nb = el_l.dim, el_r.dim
    cond = RatMatrix(wdim, na + nb)
    for j, b in enumerate(el_l.basis):
        for i, v in rho_l.matvec(b).items():
            cond[i, j] = v
    for j, b in enumerate(el_r.basis):
        for i, v in rho_r.matvec(b).items():
            cond[i, na + j] = cond[i, na + j] - v
    fp_dim = kernel_basis(cond).dim
    return {"el_glued_dim": el_n, "fiber_product_dim": fp_dim,
            "match": el_n == fp_dim}


def _msymp_with_vertical(t: LinearTheory, vertical_pred):
    """M^symp-type quotients per ghost with a custom vertical condition:
    ker Q / Q(ker of the chosen restriction).  vertical_pred is a flat
    matrix whose kernel is the vertical subspace."""
    model = ReducedModel(t)
    vert = kernel_basis(vertical_pred)
    reps = {}
    data = {}
    for g in model.ghosts:
        idx = t.bulk.ghost_indices(g)
        idx_up = t.bulk.ghost_indices(g + 1)
        ker = kernel_basis(_restrict(t.Q, t.bulk.ghost_indices(g - 1), idx))
        cols = []
        for b in vert.basis:
            loc = {i: v for i, v in b.items()}
            # split by ghost: vertical basis vectors are ghost-pure
            if all(i in set(idx_up) for i in loc):
                local = {idx_up.index(i): v for i, v in loc.items()}
                img = _restrict(t.Q, idx, idx_up).matvec(local)
                if img:
                    cols.append(img)
        qv = column_span(cols, len(idx))
        comp, _ = quotient(ker, qv)
        reps[g] = comp.basis
        data[g] = (ker, qv, comp)
    return model, reps, data


def glue_moduli(t_left, t_right, spec: GluingSpec, t_glued, epsilon=None):
    """Intrinsic reconstruction of the symplectic moduli of the glued theory:

      (i)  the fiber product of the pieces' symplectic moduli over the
           interface Euler-Lagrange fields,
      (ii) the quotient by the distribution generated by interface boundary
           fields through the beta maps,

    compared with the direct computation on the glued complex through an
    explicit isomorphism that also intertwines the bulk pairings with the
    fundamental-cycle decomposition sign epsilon."""
    iface = spec.interface_complex()
    sm_l = symp_moduli(t_left)
    sm_r = symp_moduli(t_right)
    model_l = sm_l["model"]
    model_r = sm_r["model"]
    lmapv = {v: v for v in iface.vertex_ids}
    r_of_l = {l: r for l, r in spec.pairs}
    rmapv = {v: r_of_l[v] for v in iface.vertex_ids}
    rho_l, _, wdim = _interface_restriction(t_left, iface, lmapv)
    rho_r, _, _ = _interface_restriction(t_right, iface, rmapv)
    ghosts = sorted(set(model_l.ghosts) | set(model_r.ghosts))
    mt_basis = {}      # ghost -> basis of M-tilde in (left reps + right reps) coords
    quotient_dims = {}
    intrinsic_reps = {}
    for g in ghosts:
        reps_l = sm_l["reps"].get(g, [])
        reps_r = sm_r["reps"].get(g, [])
        na, nb = len(reps_l), len(reps_r)
        idx_l = t_left.bulk.ghost_indices(g)
        idx_r = t_right.bulk.ghost_indices(g)
        cond = RatMatrix(wdim, na + nb)
        for j, rep in enumerate(reps_l):
            flat = {idx_l[i]: v for i, v in rep.items()}
            for i, v in rho_l.matvec(flat).items():
                cond[i, j] = v
        for j, rep in enumerate(reps_r):
            flat = {idx_r[i]: v for i, v in rep.items()}
            for i, v in rho_r.matvec(flat).items():
                cond[i, na + j] = cond[i, na + j] - v
        mt = kernel_basis(cond)
        mt_basis[g] = (mt, na, nb)
    # beta-tilde images of interface fields span the distribution to divide by
    beta_cols = {g: [] for g in ghosts}
    for g in ghosts:
        # interface fields of ghost g map into m-tilde at ghost g-1
        target = mt_basis.get(g - 1)
        if target is None:
            continue
        mt, na, nb = target
        if mt.dim == 0:
            continue
        for row in _interface_rows_of_ghost(t_left, iface, g):
            bl = _beta_value(t_left, sm_l, rho_l, row, g)
            br = _beta_value(t_right, sm_r, rho_r, row, g)
            vec = {}
            for i, v in bl.items():
                vec[i] = v
            for i, v in br.items():
                vec[na + i] = v
            if vec:
                x = solve(mt.matrix(), vec)
                if x is None:
                    raise GluingError("beta-tilde image leaves the fiber product")
                beta_cols[g - 1].append(x)
    intrinsic_dims = {}
    quotients = {}
    for g in ghosts:
        mt, na, nb = mt_basis[g]
        dist = column_span(beta_cols.get(g, []), mt.dim)
        amb = Subspace.full(mt.dim) if mt.dim else Subspace.zero(0)
        comp, proj = quotient(amb, dist) if mt.dim else (Subspace.zero(0), None)
        intrinsic_dims[g] = comp.dim
        quotients[g] = (mt, dist, comp, na, nb)
    # direct computation on the glued complex
    sm_n = symp_moduli(t_glued)
    direct_dims = {g: d for g, d in sm_n["dims"].items()}
    dims_match = all(
        intrinsic_dims.get(g, 0) == direct_dims.get(g, 0)
        for g in set(intrinsic_dims) | set(direct_dims)
    )
    # explicit isomorphism: restrict glued representatives to the pieces
    lmap = t_glued.cx.meta["left_map"]
    rmap = t_glued.cx.meta["right_map"]
    res_l = _bulk_restriction(t_glued, t_left, {v: lmap[v] for v in t_left.cx.vertex_ids})
    res_r = _bulk_restriction(t_glued, t_right, {v: rmap[v] for v in t_right.cx.vertex_ids})
    iso_ok = dims_match
    pair_ok = True
    eps_l = _orientation_factor(t_glued, t_left, {v: lmap[v] for v in t_left.cx.vertex_ids})
    eps_r = _orientation_factor(t_glued, t_right, {v: rmap[v] for v in t_right.cx.vertex_ids})
    for g in ghosts:
        mt, dist, comp, na, nb = quotients[g]
        reps_n = sm_n["reps"].get(g, [])
        if len(reps_n) != comp.dim:
            iso_ok = False
            continue
        cols = []
        idx_n = t_glued.bulk.ghost_indices(g)
        for rep in reps_n:
            flat = {idx_n[i]: v for i, v in rep.items()}
            xl = res_l.matvec(flat)
            xr = res_r.matvec(flat)
            cl = _msymp_coords(t_left, sm_l, g, xl)
            cr = _msymp_coords(t_right, sm_r, g, xr)
            vec = dict(cl)
            for i, v in cr.items():
                vec[na + i] = v
            x = solve(mt.matrix(), vec)
            if x is None:
                iso_ok = False
                break
            # quotient coordinates along the distribution
            if comp.dim:
                xq = _coords_in_complement(comp, dist, x)
                cols.append(xq)
        if len(cols) == len(reps_n) and comp.dim:
            if column_span(cols, comp.dim).dim != comp.dim:
                iso_ok = False
        # pairing intertwined on representatives (cochain-level identity)
        for i, x in enumerate(sm_n["reps"].get(g, [])):
            xf = {idx_n[a]: v for a, v in x.items()}
            gp = -1 + (t_glued.n - t_glued.D) - g
            for y in sm_n["reps"].get(gp, []):
                yf = {t_glued.bulk.ghost_indices(gp)[a]: v for a, v in y.items()}
                lhs = t_glued.pair_bulk(xf, yf)
                rhs = eps_l * t_left.pair_bulk(res_l.matvec(xf), res_l.matvec(yf)) + \
                    eps_r * t_right.pair_bulk(res_r.matvec(xf), res_r.matvec(yf))
                if lhs != rhs:
                    pair_ok = False
    return {
        "intrinsic_dims": {g: d for g, d in intrinsic_dims.items() if d or direct_dims.get(g)},
        "direct_dims": {g: d for g, d in direct_dims.items() if d or intrinsic_dims.get(g)},
        "dims_match": dims_match,
        "isomorphism": iso_ok,
        "pairings_intertwined": pair_ok,
    }


def _interface_rows_of_ghost(t: LinearTheory, iface: OrientedComplex, g):
    """Stacked interface-coordinate rows whose slot has ghost g (layout as
    produced by _interface_restriction)."""
    rows = []
    total = 0
    for slot in t.bulk.slots:
        sec, k = slot["sector"], slot["degree"]
        if k > iface.dimension:
            continue
        if slot["ghost"] == g:
            rows.extend(range(total, total + iface.n_faces(k)))
        total += iface.n_faces(k)
    return rows


def _beta_value(t, sm, rho, row, g):
    """[Q eta-lift] in M^symp coordinates, where eta is the interface field
    indicator of the given stacked row (ghost g), extended by zero into the
    bulk.  rho rows carry exactly one +-1 entry, so lifting is direct."""
    entries = rho.row(row)
    if len(entries) != 1:
        raise GluingError("interface restriction row is not a single face")
    (col, val), = entries.items()
    lift = {col: Fraction(1) / val}
    qlift = t.Q.matvec(lift)
    return _msymp_coords(t, sm, g - 1, qlift)


def _msymp_coords(t, sm, g, flat):
    """Coordinates of a closed flat vector's class in the M^symp basis."""
    idx = t.bulk.ghost_indices(g)
    pos = {f: i for i, f in enumerate(idx)}
    local = {}
    for i, v in flat.items():
        if i not in pos:
            raise GluingError("vector is not ghost homogeneous")
        local[pos[i]] = v
    ker, qv, comp = sm["spaces"][g]
    cols = list(comp.basis) + list(qv.basis)
    mat = RatMatrix.from_columns(cols, len(idx))
    x = solve(mat, local)
    if x is None:
        raise GluingError("vector is not a symplectic-moduli class")
    return {i: v for i, v in x.items() if i < comp.dim}


def _coords_in_complement(comp: Subspace, dist: Subspace, vec):
    cols = list(comp.basis) + list(dist.basis)
    mat = RatMatrix.from_columns(cols, comp.ambient_dim)
    x = solve(mat, vec)
    if x is None:
        raise GluingError("vector is not in complement + distribution")
    return {i: v for i, v in x.items() if i < comp.dim}


# ---------------------------------------------------------------------------
# Mayer-Vietoris sequences


def _sector_slots(t: LinearTheory):
    return [(s["sector"], s["degree"], s["ghost"]) for s in t.bulk.slots]


def mayer_vietoris(t_glued, t_left, t_right, spec: GluingSpec):
    """Both Mayer-Vietoris long exact sequences at the theory level.

    Absolute: ... -> M_iface^{g+1} -> M_N^g -> M_L^g + M_R^g -> M_iface^g -> ...
    Partially reduced: the same shape with M replaced by the symplectic
    moduli relative to the outer boundary (interface-free verticals).
    Exactness is verified at every node of both.
    """
    iface = spec.interface_complex()
    lmap = t_glued.cx.meta["left_map"]
    rmap = t_glued.cx.meta["right_map"]
    res_l = _bulk_restriction(t_glued, t_left, {v: lmap[v] for v in t_left.cx.vertex_ids})
    res_r = _bulk_restriction(t_glued, t_right, {v: rmap[v] for v in t_right.cx.vertex_ids})
    lmapv = {v: v for v in iface.vertex_ids}
    r_of_l = {l: r for l, r in spec.pairs}
    rmapv = {v: r_of_l[v] for v in iface.vertex_ids}
    rho_l, ioffs, wdim = _interface_restriction(t_left, iface, lmapv)
    rho_r, _, _ = _interface_restriction(t_right, iface, rmapv)

    ghosts = sorted(set(t_glued.bulk.ghosts()) | {0})
    gmax, gmin = max(ghosts), min(ghosts)

    def iface_ghost_rows(g):
        rows = []
        for slot in t_left.bulk.slots:
            sec, k = slot["sector"], slot["degree"]
            if (sec, k) in ioffs and slot["ghost"] == g:
                off = ioffs[(sec, k)]
                rows.extend(range(off, off + iface.n_faces(k)))
        return rows

    # interface differential on stacked interface fields
    qw = RatMatrix(wdim, wdim)
    for slot in t_left.bulk.slots:
        sec, k = slot["sector"], slot["degree"]
        if (sec, k) not in ioffs or (sec, k + 1) not in ioffs:
            continue
        d = iface.coboundary_matrix(k)
        r0 = ioffs[(sec, k + 1)]
        c0 = ioffs[(sec, k)]
        for (i, j), v in d.entries.items():
            qw[r0 + i, c0 + j] = v

    def build_sequence(vert_n, vert_l, vert_r):
        """Generic MV with chosen vertical subspaces for the three moduli."""
        piece_n = _quot_piece(t_glued, vert_n)
        piece_l = _quot_piece(t_left, vert_l)
        piece_r = _quot_piece(t_right, vert_r)
        piece_w = _GradedPiece(
            "iface",
            {g: iface_ghost_rows(g) for g in ghosts},
            {g: _restrict(qw, iface_ghost_rows(g - 1), iface_ghost_rows(g))
             for g in ghosts},
        )
        nodes = []
        maps = []
        for g in range(gmax, gmin - 1, -1):
            nodes.append((f"glued@gh{g}", len(piece_n.reps(g))))
            # restriction map to the pieces
            m = RatMatrix(len(piece_l.reps(g)) + len(piece_r.reps(g)),
                          len(piece_n.reps(g)))
            idx_n = t_glued.bulk.ghost_indices(g)
            for j, rep in enumerate(piece_n.reps(g)):
                flat = {idx_n[i]: v for i, v in rep.items()}
                cl = piece_l.coords(g, res_l.matvec(flat), t_left)
                cr = piece_r.coords(g, res_r.matvec(flat), t_right)
                for i, v in cl.items():
                    m[i, j] = v
                for i, v in cr.items():
                    m[len(piece_l.reps(g)) + i, j] = v
            maps.append(m)
            nodes.append((f"pieces@gh{g}",
                          len(piece_l.reps(g)) + len(piece_r.reps(g))))
            # difference of interface restrictions
            wrows = iface_ghost_rows(g)
            m2 = RatMatrix(len(piece_w.reps(g)),
                           len(piece_l.reps(g)) + len(piece_r.reps(g)))
            idx_l = t_left.bulk.ghost_indices(g)
            for j, rep in enumerate(piece_l.reps(g)):
                flat = {idx_l[i]: v for i, v in rep.items()}
                w = rho_l.matvec(flat)
                local = {wrows.index(i): v for i, v in w.items()}
                for i, v in piece_w.class_coords(g, local).items():
                    m2[i, j] = v
            idx_r = t_right.bulk.ghost_indices(g)
            for j, rep in enumerate(piece_r.reps(g)):
                flat = {idx_r[i]: v for i, v in rep.items()}
                w = rho_r.matvec(flat)
                local = {wrows.index(i): v for i, v in w.items()}
                for i, v in piece_w.class_coords(g, local).items():
                    m2[i, len(piece_l.reps(g)) + j] = \
                        m2[i, len(piece_l.reps(g)) + j] - v
            maps.append(m2)
            nodes.append((f"iface@gh{g}", len(piece_w.reps(g))))
            # connecting map: one-sided section (extend into the left piece,
            # take its coboundary, embed into the glued complex)
            m3 = RatMatrix(len(piece_n.reps(g - 1)), len(piece_w.reps(g)))
            wrows_g = iface_ghost_rows(g)
            emb_l = res_l.transpose()
            for j, rep in enumerate(piece_w.reps(g)):
                a = {}
                for i, v in rep.items():
                    row = rho_l.row(wrows_g[i])
                    (col, s), = row.items()
                    a[col] = a.get(col, Fraction(0)) + v / s
                qa = t_left.Q.matvec({i: v for i, v in a.items() if v})
                z = emb_l.matvec(qa)
                coords = piece_n.coords(g - 1, z, t_glued)
                for i, v in coords.items():
                    m3[i, j] = v
            maps.append(m3)
        nodes.append((f"glued@gh{gmin-1}", len(piece_n.reps(gmin - 1))))
        verdicts = verify_exactness(nodes, maps)
        return ExactSequenceReport(nodes, maps, verdicts)

    # absolute: vertical = everything (plain Q-moduli)
    absolute = build_sequence(
        _full_vertical(t_glued), _full_vertical(t_left), _full_vertical(t_right)
    )
    # partially reduced: verticals vanish on the outer boundary only
    part = build_sequence(
        _outer_vertical(t_glued, t_glued.pi),
        _outer_vertical(t_left, _outer_pi(t_left, spec, side="left")),
        _outer_vertical(t_right, _outer_pi(t_right, spec, side="right")),
    )
    return {"absolute": absolute, "partially_reduced": part}


class _QuotPiece:
    """ker Q / Q(vertical) per ghost with class coordinates."""

    def __init__(self, t: LinearTheory, vert_flat: Subspace):
        self.t = t
        self.data = {}
        for g in t.bulk.ghosts():
            idx = t.bulk.ghost_indices(g)
            idx_dn = t.bulk.ghost_indices(g - 1)
            idx_up = t.bulk.ghost_indices(g + 1)
            ker = kernel_basis(_restrict(t.Q, idx_dn, idx))
            cols = []
            up = set(idx_up)
            for b in vert_flat.basis:
                if b and set(b) <= up:
                    local = {idx_up.index(i): v for i, v in b.items()}
                    img = _restrict(t.Q, idx, idx_up).matvec(local)
                    if img:
                        cols.append(img)
            qv = column_span(cols, len(idx))
            comp, _ = quotient(ker, qv)
            self.data[g] = (ker, qv, comp)

    def reps(self, g):
        if g not in self.data:
            return []
        return self.data[g][2].basis

    def coords(self, g, flat, t):
        idx = t.bulk.ghost_indices(g)
        pos = {f: i for i, f in enumerate(idx)}
        local = {pos[i]: v for i, v in flat.items() if i in pos}
        if len(local) != len([i for i in flat if flat[i]]):
            raise GluingError("vector not ghost homogeneous")
        ker, qv, comp = self.data[g]
        cols = list(comp.basis) + list(qv.basis)
        mat = RatMatrix.from_columns(cols, len(idx))
        x = solve(mat, local)
        if x is None:
            raise GluingError("vector is not a class of the quotient piece")
        return {i: v for i, v in x.items() if i < comp.dim}

def _quot_piece(t, vert):
    return _QuotPiece(t, vert)


def _full_vertical(t: LinearTheory) -> Subspace:
    return Subspace.full(t.bulk.total)


def _outer_vertical(t: LinearTheory, pi_outer: RatMatrix) -> Subspace:
    return kernel_basis(pi_outer)


def _outer_pi(t: LinearTheory, spec: GluingSpec, side):
    """Restriction of a piece's boundary map to the outer (non-interface)
    part of its boundary."""
    iface_verts = {l for l, _ in spec.pairs} if side == "left" else \
        {r for _, r in spec.pairs}
    cx = t.cx
    bc = cx.boundary_complex()
    keep_rows = []
    off = 0
    for slot in t.bdry.slots:
        sec, k = slot["sector"], slot["degree"]
        for i, f in enumerate(bc.faces(k)):
            verts = set(bc.face_vertices(f))
            if not verts <= iface_verts:
                keep_rows.append(off + i)
        off += slot["dim"]
    m = RatMatrix(len(keep_rows), t.bulk.total)
    for r, row in enumerate(keep_rows):
        for (i, j), v in t.pi.entries.items():
            if i == row:
                m[r, j] = v
    return m


# ---------------------------------------------------------------------------
# morphism composition


def compose_morphisms(t1, t2, spec: GluingSpec, build):
    """Composition of two theories-as-morphisms along the shared boundary:
    glue the complexes, rebuild the theory, and verify action additivity,
    Lagrangianity of the composed evolution relation, and that the glued
    moduli agree with the intrinsic construction."""
    from .moduli import evolution_relation

    cx = glue(spec)
    t = build(cx)
    lmap = cx.meta["left_map"]
    rmap = cx.meta["right_map"]
    res_l = _bulk_restriction(t, t1, {v: lmap[v] for v in t1.cx.vertex_ids})
    res_r = _bulk_restriction(t, t2, {v: rmap[v] for v in t2.cx.vertex_ids})
    eps = _orientation_factor(t, t1, lmap)
    eps_r = _orientation_factor(t, t2, rmap)
    s_sum = (res_l.transpose() * t1.S_mat * res_l).scale(eps) + \
        (res_r.transpose() * t2.S_mat * res_r).scale(eps_r)
    diff = t.S_mat - s_sum
    additive = (diff + diff.transpose()).is_zero()
    ev = evolution_relation(t)
    gm = glue_moduli(t1, t2, spec, t)
    return {
        "glued_complex": cx,
        "glued_theory": t,
        "action_additive": additive,
        "evolution_lagrangian": ev["verdict"]["lagrangian"],
        "moduli": gm,
    }


def _orientation_factor(t_glued, t_piece, vmap):
    """+1 or -1 according to how the glued fundamental class restricts to
    the piece (the gluing may have been performed against a reversed copy)."""
    factors = set()
    for face, s in t_piece.cx.top.items():
        verts = [vmap[v] for v in t_piece.cx.face_vertices(face)]
        pos = [t_glued.cx.vertex_position(v) for v in verts]
        sgn = _perm_sign(pos)
        key = tuple(sorted(pos))
        factors.add(int(t_glued.cx.top[key]) * sgn * int(s))
    if len(factors) != 1:
        raise GluingError("glued orientation does not restrict uniformly")
    return Fraction(factors.pop())
