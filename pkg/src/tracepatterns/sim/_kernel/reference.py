"""Pure-Python physics kernel.

This is the fallback twin of ``_native.pyx``. The two implementations are
kept line-parallel and must produce bit-identical results: every arithmetic
expression appears in the same order in both, only IEEE-double operations
are used (no hypot/pow), and iteration order is fixed. Any change here must
be mirrored in the .pyx file.

World layout (all arrays owned by the caller):
    bodies:   pos (nb,2), vel (nb,2), angle (nb,), angvel (nb,),
              inv_mass (nb,), inv_inertia (nb,)
    fixtures: fix_body (nf,), fix_type (nf,) [0=circle, 1=polygon],
              fix_radius (nf,), fix_vstart (nf,), fix_vcount (nf,),
              verts_local (nv,2), verts_world (nv,2) scratch
    contacts: active (nb,nb) uint8, last_cp (nb,nb,2) float64

``step_world`` advances one frame (``substeps`` substeps of ``dt/substeps``)
and returns transition records for the contact set:
    (substep, kind, a, b, npts, p1x, p1y, p2x, p2y,
     ax, ay, aangle, bx, by, bangle)
with kind 1 = contact begins, 0 = contact ends, a < b body slots, poses
taken at the detecting substep's start-of-substep state.
"""

import math

BIG = 1e30
SLOP = 0.05
CORRECTION = 0.4
MAX_POLY = 16


def _closest_on_segment(px, py, ax, ay, bx, by):
    """Closest point to (px,py) on segment a-b."""
    abx = bx - ax
    aby = by - ay
    apx = px - ax
    apy = py - ay
    denom = abx * abx + aby * aby
    if denom <= 1e-18:
        return ax, ay
    t = (apx * abx + apy * aby) / denom
    if t < 0.0:
        t = 0.0
    elif t > 1.0:
        t = 1.0
    return ax + abx * t, ay + aby * t


def _collide_circle_circle(ax, ay, ar, bx, by, br, out):
    dx = bx - ax
    dy = by - ay
    d2 = dx * dx + dy * dy
    d = math.sqrt(d2)
    sep = d - (ar + br)
    if d > 1e-12:
        nx = dx / d
        ny = dy / d
    else:
        nx = 0.0
        ny = 1.0
    px = ax + nx * (ar + sep * 0.5)
    py = ay + ny * (ar + sep * 0.5)
    out[0] = sep
    out[1] = nx
    out[2] = ny
    out[3] = 1.0
    out[4] = px
    out[5] = py
    out[6] = 0.0
    out[7] = 0.0


def _collide_circle_polygon(cx, cy, cr, verts_world, vstart, vcount, out):
    """Normal points from the circle toward the polygon."""
    best_d2 = BIG
    qx = 0.0
    qy = 0.0
    inside = True
    for i in range(vcount):
        x0 = verts_world[vstart + i, 0]
        y0 = verts_world[vstart + i, 1]
        j = i + 1
        if j == vcount:
            j = 0
        x1 = verts_world[vstart + j, 0]
        y1 = verts_world[vstart + j, 1]
        ex = x1 - x0
        ey = y1 - y0
        # CCW polygon: point is inside iff left of every edge.
        if ex * (cy - y0) - ey * (cx - x0) < 0.0:
            inside = False
        sx, sy = _closest_on_segment(cx, cy, x0, y0, x1, y1)
        ddx = sx - cx
        ddy = sy - cy
        dd = ddx * ddx + ddy * ddy
        if dd < best_d2:
            best_d2 = dd
            qx = sx
            qy = sy
    d = math.sqrt(best_d2)
    if inside:
        sep = -(d + cr)
        if d > 1e-12:
            nx = (qx - cx) / d
            ny = (qy - cy) / d
        else:
            nx = 0.0
            ny = 1.0
    else:
        sep = d - cr
        if d > 1e-12:
            nx = (qx - cx) / d
            ny = (qy - cy) / d
        else:
            nx = 0.0
            ny = 1.0
    out[0] = sep
    out[1] = nx
    out[2] = ny
    out[3] = 1.0
    out[4] = qx
    out[5] = qy
    out[6] = 0.0
    out[7] = 0.0


def _face_separation(verts_world, astart, acount, bstart, bcount):
    """Max over A's faces of min over B's verts of the signed distance.

    Returns (separation, face_nx, face_ny).
    """
    best = -BIG
    best_nx = 0.0
    best_ny = 0.0
    for i in range(acount):
        x0 = verts_world[astart + i, 0]
        y0 = verts_world[astart + i, 1]
        j = i + 1
        if j == acount:
            j = 0
        x1 = verts_world[astart + j, 0]
        y1 = verts_world[astart + j, 1]
        ex = x1 - x0
        ey = y1 - y0
        ln = math.sqrt(ex * ex + ey * ey)
        if ln <= 1e-12:
            continue
        # Outward normal of a CCW edge.
        nx = ey / ln
        ny = -ex / ln
        smin = BIG
        for k in range(bcount):
            s = nx * (verts_world[bstart + k, 0] - x0) + ny * (verts_world[bstart + k, 1] - y0)
            if s < smin:
                smin = s
        if smin > best:
            best = smin
            best_nx = nx
            best_ny = ny
    return best, best_nx, best_ny


def _poly_closest_points(verts_world, astart, acount, bstart, bcount):
    """Min distance between two disjoint convex polygons and the closest pair."""
    best_d2 = BIG
    pax = pay = pbx = pby = 0.0
    for i in range(acount):
        px = verts_world[astart + i, 0]
        py = verts_world[astart + i, 1]
        for k in range(bcount):
            x0 = verts_world[bstart + k, 0]
            y0 = verts_world[bstart + k, 1]
            m = k + 1
            if m == bcount:
                m = 0
            x1 = verts_world[bstart + m, 0]
            y1 = verts_world[bstart + m, 1]
            sx, sy = _closest_on_segment(px, py, x0, y0, x1, y1)
            ddx = sx - px
            ddy = sy - py
            dd = ddx * ddx + ddy * ddy
            if dd < best_d2:
                best_d2 = dd
                pax = px
                pay = py
                pbx = sx
                pby = sy
    for i in range(bcount):
        px = verts_world[bstart + i, 0]
        py = verts_world[bstart + i, 1]
        for k in range(acount):
            x0 = verts_world[astart + k, 0]
            y0 = verts_world[astart + k, 1]
            m = k + 1
            if m == acount:
                m = 0
            x1 = verts_world[astart + m, 0]
            y1 = verts_world[astart + m, 1]
            sx, sy = _closest_on_segment(px, py, x0, y0, x1, y1)
            ddx = sx - px
            ddy = sy - py
            dd = ddx * ddx + ddy * ddy
            if dd < best_d2:
                best_d2 = dd
                pax = sx
                pay = sy
                pbx = px
                pby = py
    return math.sqrt(best_d2), pax, pay, pbx, pby


def _polygon_contact_points(verts_world, astart, acount, bstart, bcount, out):
    """Up to two deepest-proximity contact points between overlapping polygons
    (closest vertex-to-edge pairs, both directions)."""
    best_d2 = BIG
    c1x = c1y = c2x = c2y = 0.0
    npts = 0
    for i in range(acount + bcount):
        if i < acount:
            px = verts_world[astart + i, 0]
            py = verts_world[astart + i, 1]
            estart = bstart
            ecount = bcount
        else:
            px = verts_world[bstart + (i - acount), 0]
            py = verts_world[bstart + (i - acount), 1]
            estart = astart
            ecount = acount
        for k in range(ecount):
            x0 = verts_world[estart + k, 0]
            y0 = verts_world[estart + k, 1]
            m = k + 1
            if m == ecount:
                m = 0
            x1 = verts_world[estart + m, 0]
            y1 = verts_world[estart + m, 1]
            sx, sy = _closest_on_segment(px, py, x0, y0, x1, y1)
            ddx = sx - px
            ddy = sy - py
            dd = ddx * ddx + ddy * ddy
            if dd < best_d2 - 1e-9:
                best_d2 = dd
                c1x = sx
                c1y = sy
                npts = 1
            elif dd < best_d2 + 1e-9 and npts == 1:
                ex = sx - c1x
                ey = sy - c1y
                if ex * ex + ey * ey > 1e-6:
                    c2x = sx
                    c2y = sy
                    npts = 2
    out[4] = c1x
    out[5] = c1y
    out[6] = c2x
    out[7] = c2y
    out[3] = float(npts)


def _collide_polygon_polygon(verts_world, astart, acount, bstart, bcount, tol, out):
    """Normal points from polygon A toward polygon B. Sets out[0] to +BIG when
    the pair is separated by more than tol."""
    sep_a, anx, any_ = _face_separation(verts_world, astart, acount, bstart, bcount)
    sep_b, bnx, bny = _face_separation(verts_world, bstart, bcount, astart, acount)
    if sep_a > tol or sep_b > tol:
        out[0] = BIG
        return
    if sep_a > 0.0 or sep_b > 0.0:
        # Disjoint but near: exact distance between boundaries.
        d, pax, pay, pbx, pby = _poly_closest_points(verts_world, astart, acount, bstart, bcount)
        if d > tol:
            out[0] = BIG
            return
        if d > 1e-12:
            nx = (pbx - pax) / d
            ny = (pby - pay) / d
        else:
            nx = anx
            ny = any_
        out[0] = d
        out[1] = nx
        out[2] = ny
        out[3] = 1.0
        out[4] = (pax + pbx) * 0.5
        out[5] = (pay + pby) * 0.5
        out[6] = 0.0
        out[7] = 0.0
        return
    # Overlapping: least-penetration axis.
    if sep_a >= sep_b:
        sep = sep_a
        nx = anx
        ny = any_
    else:
        sep = sep_b
        nx = -bnx
        ny = -bny
    out[0] = sep
    out[1] = nx
    out[2] = ny
    _polygon_contact_points(verts_world, astart, acount, bstart, bcount, out)


def _update_world_verts(pos, angle, fix_body, fix_type, fix_vstart, fix_vcount, verts_local, verts_world, nf):
    for f in range(nf):
        if fix_type[f] != 1:
            continue
        b = fix_body[f]
        c = math.cos(angle[b])
        s = math.sin(angle[b])
        bx = pos[b, 0]
        by = pos[b, 1]
        start = fix_vstart[f]
        for k in range(start, start + fix_vcount[f]):
            lx = verts_local[k, 0]
            ly = verts_local[k, 1]
            verts_world[k, 0] = bx + c * lx - s * ly
            verts_world[k, 1] = by + s * lx + c * ly


def _detect_pairs(pos, angle, fix_body, fix_type, fix_radius, fix_vstart, fix_vcount,
                  verts_local, verts_world, inv_mass, nf, tol,
                  pair_sep, pair_data, man_buf):
    """One narrowphase pass. Fills pair_sep/pair_data (per body pair) and
    writes penetrating fixture manifolds into man_buf. Returns the manifold
    count.

    pair_sep:  (nb,nb) min separation seen this pass (BIG when none)
    pair_data: (nb,nb,5) representative contact points (p1x,p1y,p2x,p2y,npts)
    man_buf:   (cap,10) rows (a, b, nx, ny, depth, npts, p1x, p1y, p2x, p2y)
    """
    out = [0.0] * 8
    nman = 0
    nb = pair_sep.shape[0]
    for i in range(nb):
        for j in range(nb):
            pair_sep[i, j] = BIG
    for fa in range(nf):
        ba = fix_body[fa]
        for fb in range(fa + 1, nf):
            bb = fix_body[fb]
            if ba == bb:
                continue
            if inv_mass[ba] == 0.0 and inv_mass[bb] == 0.0:
                continue
            # Order so a < b (slot order defines the normal direction a->b).
            if ba < bb:
                a, b = ba, bb
                f1, f2 = fa, fb
            else:
                a, b = bb, ba
                f1, f2 = fb, fa
            # AABB prune, inflated by tol.
            if not _aabb_overlap(pos, fix_body, fix_type, fix_radius, fix_vstart,
                                 fix_vcount, verts_world, f1, f2, tol):
                continue
            t1 = fix_type[f1]
            t2 = fix_type[f2]
            if t1 == 0 and t2 == 0:
                _collide_circle_circle(
                    pos[a, 0], pos[a, 1], fix_radius[f1],
                    pos[b, 0], pos[b, 1], fix_radius[f2], out)
                if out[0] > tol:
                    continue
            elif t1 == 0 and t2 == 1:
                _collide_circle_polygon(
                    pos[a, 0], pos[a, 1], fix_radius[f1],
                    verts_world, fix_vstart[f2], fix_vcount[f2], out)
                if out[0] > tol:
                    continue
            elif t1 == 1 and t2 == 0:
                _collide_circle_polygon(
                    pos[b, 0], pos[b, 1], fix_radius[f2],
                    verts_world, fix_vstart[f1], fix_vcount[f1], out)
                if out[0] > tol:
                    continue
                # Normal came out circle->polygon, i.e. b->a; flip to a->b.
                out[1] = -out[1]
                out[2] = -out[2]
            else:
                _collide_polygon_polygon(
                    verts_world, fix_vstart[f1], fix_vcount[f1],
                    fix_vstart[f2], fix_vcount[f2], tol, out)
                if out[0] > tol:
                    continue
            sep = out[0]
            if sep < pair_sep[a, b]:
                pair_sep[a, b] = sep
                pair_data[a, b, 0] = out[4]
                pair_data[a, b, 1] = out[5]
                pair_data[a, b, 2] = out[6]
                pair_data[a, b, 3] = out[7]
                pair_data[a, b, 4] = out[3]
            if sep < 0.0:
                man_buf[nman, 0] = a
                man_buf[nman, 1] = b
                man_buf[nman, 2] = out[1]
                man_buf[nman, 3] = out[2]
                man_buf[nman, 4] = -sep
                man_buf[nman, 5] = out[3]
                man_buf[nman, 6] = out[4]
                man_buf[nman, 7] = out[5]
                man_buf[nman, 8] = out[6]
                man_buf[nman, 9] = out[7]
                nman += 1
    return nman


def _aabb_overlap(pos, fix_body, fix_type, fix_radius, fix_vstart, fix_vcount,
                  verts_world, f1, f2, tol):
    lo1x, lo1y, hi1x, hi1y = _fixture_aabb(pos, fix_body, fix_type, fix_radius,
                                           fix_vstart, fix_vcount, verts_world, f1)
    lo2x, lo2y, hi2x, hi2y = _fixture_aabb(pos, fix_body, fix_type, fix_radius,
                                           fix_vstart, fix_vcount, verts_world, f2)
    if lo1x - tol > hi2x or lo2x - tol > hi1x:
        return False
    if lo1y - tol > hi2y or lo2y - tol > hi1y:
        return False
    return True


def _fixture_aabb(pos, fix_body, fix_type, fix_radius, fix_vstart, fix_vcount, verts_world, f):
    b = fix_body[f]
    if fix_type[f] == 0:
        r = fix_radius[f]
        return pos[b, 0] - r, pos[b, 1] - r, pos[b, 0] + r, pos[b, 1] + r
    start = fix_vstart[f]
    lox = BIG
    loy = BIG
    hix = -BIG
    hiy = -BIG
    for k in range(start, start + fix_vcount[f]):
        x = verts_world[k, 0]
        y = verts_world[k, 1]
        if x < lox:
            lox = x
        if x > hix:
            hix = x
        if y < loy:
            loy = y
        if y > hiy:
            hiy = y
    return lox, loy, hix, hiy


def _resolve_velocity(pos, vel, angvel, inv_mass, inv_inertia, man_buf, nman,
                      restitution, friction, rest_threshold):
    for _ in range(2):
        for m in range(nman):
            a = int(man_buf[m, 0])
            b = int(man_buf[m, 1])
            nx = man_buf[m, 2]
            ny = man_buf[m, 3]
            npts = int(man_buf[m, 5])
            for p in range(npts):
                if p == 0:
                    px = man_buf[m, 6]
                    py = man_buf[m, 7]
                else:
                    px = man_buf[m, 8]
                    py = man_buf[m, 9]
                rax = px - pos[a, 0]
                ray = py - pos[a, 1]
                rbx = px - pos[b, 0]
                rby = py - pos[b, 1]
                # Velocity of the contact point on each body.
                vax = vel[a, 0] - angvel[a] * ray
                vay = vel[a, 1] + angvel[a] * rax
                vbx = vel[b, 0] - angvel[b] * rby
                vby = vel[b, 1] + angvel[b] * rbx
                rvx = vbx - vax
                rvy = vby - vay
                vn = rvx * nx + rvy * ny
                if vn >= 0.0:
                    continue
                e = restitution
                if -vn < rest_threshold:
                    e = 0.0
                ran = rax * ny - ray * nx
                rbn = rbx * ny - rby * nx
                denom = inv_mass[a] + inv_mass[b] + ran * ran * inv_inertia[a] + rbn * rbn * inv_inertia[b]
                if denom <= 0.0:
                    continue
                jn = -(1.0 + e) * vn / denom / npts
                jx = jn * nx
                jy = jn * ny
                vel[a, 0] = vel[a, 0] - jx * inv_mass[a]
                vel[a, 1] = vel[a, 1] - jy * inv_mass[a]
                angvel[a] = angvel[a] - (rax * jy - ray * jx) * inv_inertia[a]
                vel[b, 0] = vel[b, 0] + jx * inv_mass[b]
                vel[b, 1] = vel[b, 1] + jy * inv_mass[b]
                angvel[b] = angvel[b] + (rbx * jy - rby * jx) * inv_inertia[b]
                # Coulomb friction along the tangent.
                vax = vel[a, 0] - angvel[a] * ray
                vay = vel[a, 1] + angvel[a] * rax
                vbx = vel[b, 0] - angvel[b] * rby
                vby = vel[b, 1] + angvel[b] * rbx
                rvx = vbx - vax
                rvy = vby - vay
                tx = rvx - (rvx * nx + rvy * ny) * nx
                ty = rvy - (rvx * nx + rvy * ny) * ny
                tlen = math.sqrt(tx * tx + ty * ty)
                if tlen <= 1e-9:
                    continue
                tx = tx / tlen
                ty = ty / tlen
                rat = rax * ty - ray * tx
                rbt = rbx * ty - rby * tx
                denom_t = inv_mass[a] + inv_mass[b] + rat * rat * inv_inertia[a] + rbt * rbt * inv_inertia[b]
                if denom_t <= 0.0:
                    continue
                jt = -(rvx * tx + rvy * ty) / denom_t / npts
                maxf = friction * jn
                if jt < -maxf:
                    jt = -maxf
                elif jt > maxf:
                    jt = maxf
                jx = jt * tx
                jy = jt * ty
                vel[a, 0] = vel[a, 0] - jx * inv_mass[a]
                vel[a, 1] = vel[a, 1] - jy * inv_mass[a]
                angvel[a] = angvel[a] - (rax * jy - ray * jx) * inv_inertia[a]
                vel[b, 0] = vel[b, 0] + jx * inv_mass[b]
                vel[b, 1] = vel[b, 1] + jy * inv_mass[b]
                angvel[b] = angvel[b] + (rbx * jy - rby * jx) * inv_inertia[b]


def _positional_correction(pos, inv_mass, man_buf, nman):
    for m in range(nman):
        a = int(man_buf[m, 0])
        b = int(man_buf[m, 1])
        nx = man_buf[m, 2]
        ny = man_buf[m, 3]
        depth = man_buf[m, 4]
        total = inv_mass[a] + inv_mass[b]
        if total <= 0.0:
            continue
        mag = depth - SLOP
        if mag <= 0.0:
            continue
        mag = mag * CORRECTION / total
        pos[a, 0] = pos[a, 0] - nx * mag * inv_mass[a]
        pos[a, 1] = pos[a, 1] - ny * mag * inv_mass[a]
        pos[b, 0] = pos[b, 0] + nx * mag * inv_mass[b]
        pos[b, 1] = pos[b, 1] + ny * mag * inv_mass[b]


def scan_contacts(pos, vel, angle, angvel, inv_mass, inv_inertia,
                  fix_body, fix_type, fix_radius, fix_vstart, fix_vcount,
                  verts_local, verts_world, pair_sep, pair_data, man_buf, tol):
    """Current contact pairs (separation <= tol): list of
    (a, b, npts, p1x, p1y, p2x, p2y)."""
    nf = len(fix_body)
    _update_world_verts(pos, angle, fix_body, fix_type, fix_vstart, fix_vcount,
                        verts_local, verts_world, nf)
    _detect_pairs(pos, angle, fix_body, fix_type, fix_radius, fix_vstart, fix_vcount,
                  verts_local, verts_world, inv_mass, nf, tol, pair_sep, pair_data, man_buf)
    nb = pair_sep.shape[0]
    result = []
    for a in range(nb):
        for b in range(a + 1, nb):
            if pair_sep[a, b] <= tol:
                result.append((a, b, int(pair_data[a, b, 4]), pair_data[a, b, 0],
                               pair_data[a, b, 1], pair_data[a, b, 2], pair_data[a, b, 3]))
    return result


def step_world(pos, vel, angle, angvel, inv_mass, inv_inertia,
               fix_body, fix_type, fix_radius, fix_vstart, fix_vcount,
               verts_local, verts_world, active, last_cp,
               dt, substeps, gravity_y, restitution, friction,
               tol, vel_cap, rest_threshold, pair_sep, pair_data, man_buf):
    """Advance one frame. Returns contact transition records (see module doc)."""
    nb = pos.shape[0]
    nf = len(fix_body)
    h = dt / substeps
    records = []
    for sub in range(substeps):
        _update_world_verts(pos, angle, fix_body, fix_type, fix_vstart, fix_vcount,
                            verts_local, verts_world, nf)
        nman = _detect_pairs(pos, angle, fix_body, fix_type, fix_radius, fix_vstart,
                             fix_vcount, verts_local, verts_world, inv_mass, nf, tol,
                             pair_sep, pair_data, man_buf)

        # Contact-set transitions, evaluated on start-of-substep geometry.
        for a in range(nb):
            for b in range(a + 1, nb):
                if inv_mass[a] == 0.0 and inv_mass[b] == 0.0:
                    continue
                now = 1 if pair_sep[a, b] <= tol else 0
                was = active[a, b]
                if now == was:
                    continue
                active[a, b] = now
                if now == 1:
                    last_cp[a, b, 0] = pair_data[a, b, 0]
                    last_cp[a, b, 1] = pair_data[a, b, 1]
                    records.append((sub, 1, a, b, int(pair_data[a, b, 4]),
                                    pair_data[a, b, 0], pair_data[a, b, 1],
                                    pair_data[a, b, 2], pair_data[a, b, 3],
                                    pos[a, 0], pos[a, 1], angle[a],
                                    pos[b, 0], pos[b, 1], angle[b]))
                else:
                    records.append((sub, 0, a, b, 1,
                                    last_cp[a, b, 0], last_cp[a, b, 1], 0.0, 0.0,
                                    pos[a, 0], pos[a, 1], angle[a],
                                    pos[b, 0], pos[b, 1], angle[b]))

        # Gravity, then impulses, then integration and correction.
        for i in range(nb):
            if inv_mass[i] > 0.0:
                vel[i, 1] = vel[i, 1] - gravity_y * h
                sp2 = vel[i, 0] * vel[i, 0] + vel[i, 1] * vel[i, 1]
                if sp2 > vel_cap * vel_cap:
                    scale = vel_cap / math.sqrt(sp2)
                    vel[i, 0] = vel[i, 0] * scale
                    vel[i, 1] = vel[i, 1] * scale

        _resolve_velocity(pos, vel, angvel, inv_mass, inv_inertia, man_buf, nman,
                          restitution, friction, rest_threshold)

        for i in range(nb):
            if inv_mass[i] > 0.0:
                pos[i, 0] = pos[i, 0] + vel[i, 0] * h
                pos[i, 1] = pos[i, 1] + vel[i, 1] * h
                angle[i] = angle[i] + angvel[i] * h

        _positional_correction(pos, inv_mass, man_buf, nman)

    return records
