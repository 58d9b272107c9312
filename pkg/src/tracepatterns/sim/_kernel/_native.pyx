# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled physics kernel.

Line-parallel twin of reference.py: same arithmetic in the same order, so
both backends produce bit-identical trajectories. Keep the two files in
sync; see reference.py for the full contract documentation.
"""

from libc.math cimport sqrt, sin, cos

cdef double BIG = 1e30
cdef double SLOP = 0.05
cdef double CORRECTION = 0.4


cdef inline void _closest_on_segment(double px, double py, double ax, double ay,
                                     double bx, double by,
                                     double *ox, double *oy) nogil:
    cdef double abx = bx - ax
    cdef double aby = by - ay
    cdef double apx = px - ax
    cdef double apy = py - ay
    cdef double denom = abx * abx + aby * aby
    cdef double t
    if denom <= 1e-18:
        ox[0] = ax
        oy[0] = ay
        return
    t = (apx * abx + apy * aby) / denom
    if t < 0.0:
        t = 0.0
    elif t > 1.0:
        t = 1.0
    ox[0] = ax + abx * t
    oy[0] = ay + aby * t


cdef void _collide_circle_circle(double ax, double ay, double ar,
                                 double bx, double by, double br,
                                 double *out) nogil:
    cdef double dx = bx - ax
    cdef double dy = by - ay
    cdef double d2 = dx * dx + dy * dy
    cdef double d = sqrt(d2)
    cdef double sep = d - (ar + br)
    cdef double nx, ny, px, py
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


cdef void _collide_circle_polygon(double cx, double cy, double cr,
                                  double[:, ::1] verts_world,
                                  Py_ssize_t vstart, Py_ssize_t vcount,
                                  double *out) nogil:
    cdef double best_d2 = BIG
    cdef double qx = 0.0
    cdef double qy = 0.0
    cdef bint inside = True
    cdef Py_ssize_t i, j
    cdef double x0, y0, x1, y1, ex, ey, sx, sy, ddx, ddy, dd, d, sep, nx, ny
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
        if ex * (cy - y0) - ey * (cx - x0) < 0.0:
            inside = False
        _closest_on_segment(cx, cy, x0, y0, x1, y1, &sx, &sy)
        ddx = sx - cx
        ddy = sy - cy
        dd = ddx * ddx + ddy * ddy
        if dd < best_d2:
            best_d2 = dd
            qx = sx
            qy = sy
    d = sqrt(best_d2)
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


cdef void _face_separation(double[:, ::1] verts_world,
                           Py_ssize_t astart, Py_ssize_t acount,
                           Py_ssize_t bstart, Py_ssize_t bcount,
                           double *best, double *best_nx, double *best_ny) nogil:
    cdef double bb = -BIG
    cdef double bnx = 0.0
    cdef double bny = 0.0
    cdef Py_ssize_t i, j, k
    cdef double x0, y0, x1, y1, ex, ey, ln, nx, ny, smin, s
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
        ln = sqrt(ex * ex + ey * ey)
        if ln <= 1e-12:
            continue
        nx = ey / ln
        ny = -ex / ln
        smin = BIG
        for k in range(bcount):
            s = nx * (verts_world[bstart + k, 0] - x0) + ny * (verts_world[bstart + k, 1] - y0)
            if s < smin:
                smin = s
        if smin > bb:
            bb = smin
            bnx = nx
            bny = ny
    best[0] = bb
    best_nx[0] = bnx
    best_ny[0] = bny


cdef void _poly_closest_points(double[:, ::1] verts_world,
                               Py_ssize_t astart, Py_ssize_t acount,
                               Py_ssize_t bstart, Py_ssize_t bcount,
                               double *od, double *opax, double *opay,
                               double *opbx, double *opby) nogil:
    cdef double best_d2 = BIG
    cdef double pax = 0.0, pay = 0.0, pbx = 0.0, pby = 0.0
    cdef Py_ssize_t i, k, m
    cdef double px, py, x0, y0, x1, y1, sx, sy, ddx, ddy, dd
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
            _closest_on_segment(px, py, x0, y0, x1, y1, &sx, &sy)
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
            _closest_on_segment(px, py, x0, y0, x1, y1, &sx, &sy)
            ddx = sx - px
            ddy = sy - py
            dd = ddx * ddx + ddy * ddy
            if dd < best_d2:
                best_d2 = dd
                pax = sx
                pay = sy
                pbx = px
                pby = py
    od[0] = sqrt(best_d2)
    opax[0] = pax
    opay[0] = pay
    opbx[0] = pbx
    opby[0] = pby


cdef void _polygon_contact_points(double[:, ::1] verts_world,
                                  Py_ssize_t astart, Py_ssize_t acount,
                                  Py_ssize_t bstart, Py_ssize_t bcount,
                                  double *out) nogil:
    cdef double best_d2 = BIG
    cdef double c1x = 0.0, c1y = 0.0, c2x = 0.0, c2y = 0.0
    cdef int npts = 0
    cdef Py_ssize_t i, k, m, estart, ecount
    cdef double px, py, x0, y0, x1, y1, sx, sy, ddx, ddy, dd, ex, ey
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
            _closest_on_segment(px, py, x0, y0, x1, y1, &sx, &sy)
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
    out[3] = <double> npts


cdef void _collide_polygon_polygon(double[:, ::1] verts_world,
                                   Py_ssize_t astart, Py_ssize_t acount,
                                   Py_ssize_t bstart, Py_ssize_t bcount,
                                   double tol, double *out) nogil:
    cdef double sep_a, anx, any_, sep_b, bnx, bny
    cdef double d, pax, pay, pbx, pby, nx, ny, sep
    _face_separation(verts_world, astart, acount, bstart, bcount, &sep_a, &anx, &any_)
    _face_separation(verts_world, bstart, bcount, astart, acount, &sep_b, &bnx, &bny)
    if sep_a > tol or sep_b > tol:
        out[0] = BIG
        return
    if sep_a > 0.0 or sep_b > 0.0:
        _poly_closest_points(verts_world, astart, acount, bstart, bcount,
                             &d, &pax, &pay, &pbx, &pby)
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


cdef void _update_world_verts(double[:, ::1] pos, double[::1] angle,
                              long[::1] fix_body, long[::1] fix_type,
                              long[::1] fix_vstart, long[::1] fix_vcount,
                              double[:, ::1] verts_local, double[:, ::1] verts_world,
                              Py_ssize_t nf) nogil:
    cdef Py_ssize_t f, b, start, k
    cdef double c, s, bx, by, lx, ly
    for f in range(nf):
        if fix_type[f] != 1:
            continue
        b = fix_body[f]
        c = cos(angle[b])
        s = sin(angle[b])
        bx = pos[b, 0]
        by = pos[b, 1]
        start = fix_vstart[f]
        for k in range(start, start + fix_vcount[f]):
            lx = verts_local[k, 0]
            ly = verts_local[k, 1]
            verts_world[k, 0] = bx + c * lx - s * ly
            verts_world[k, 1] = by + s * lx + c * ly


cdef inline bint _aabb_overlap(double[:, ::1] pos, long[::1] fix_body,
                               long[::1] fix_type, double[::1] fix_radius,
                               long[::1] fix_vstart, long[::1] fix_vcount,
                               double[:, ::1] verts_world,
                               Py_ssize_t f1, Py_ssize_t f2, double tol) nogil:
    cdef double lo1x, lo1y, hi1x, hi1y, lo2x, lo2y, hi2x, hi2y
    _fixture_aabb(pos, fix_body, fix_type, fix_radius, fix_vstart, fix_vcount,
                  verts_world, f1, &lo1x, &lo1y, &hi1x, &hi1y)
    _fixture_aabb(pos, fix_body, fix_type, fix_radius, fix_vstart, fix_vcount,
                  verts_world, f2, &lo2x, &lo2y, &hi2x, &hi2y)
    if lo1x - tol > hi2x or lo2x - tol > hi1x:
        return False
    if lo1y - tol > hi2y or lo2y - tol > hi1y:
        return False
    return True


cdef void _fixture_aabb(double[:, ::1] pos, long[::1] fix_body, long[::1] fix_type,
                        double[::1] fix_radius, long[::1] fix_vstart,
                        long[::1] fix_vcount, double[:, ::1] verts_world,
                        Py_ssize_t f, double *lox, double *loy,
                        double *hix, double *hiy) nogil:
    cdef Py_ssize_t b = fix_body[f]
    cdef double r
    cdef Py_ssize_t start, k
    cdef double x, y, alox, aloy, ahix, ahiy
    if fix_type[f] == 0:
        r = fix_radius[f]
        lox[0] = pos[b, 0] - r
        loy[0] = pos[b, 1] - r
        hix[0] = pos[b, 0] + r
        hiy[0] = pos[b, 1] + r
        return
    start = fix_vstart[f]
    alox = BIG
    aloy = BIG
    ahix = -BIG
    ahiy = -BIG
    for k in range(start, start + fix_vcount[f]):
        x = verts_world[k, 0]
        y = verts_world[k, 1]
        if x < alox:
            alox = x
        if x > ahix:
            ahix = x
        if y < aloy:
            aloy = y
        if y > ahiy:
            ahiy = y
    lox[0] = alox
    loy[0] = aloy
    hix[0] = ahix
    hiy[0] = ahiy


cdef Py_ssize_t _detect_pairs(double[:, ::1] pos, double[::1] angle,
                              long[::1] fix_body, long[::1] fix_type,
                              double[::1] fix_radius, long[::1] fix_vstart,
                              long[::1] fix_vcount, double[:, ::1] verts_local,
                              double[:, ::1] verts_world, double[::1] inv_mass,
                              Py_ssize_t nf, double tol,
                              double[:, ::1] pair_sep, double[:, :, ::1] pair_data,
                              double[:, ::1] man_buf) nogil:
    cdef double out[8]
    cdef Py_ssize_t nman = 0
    cdef Py_ssize_t nb = pair_sep.shape[0]
    cdef Py_ssize_t i, j, fa, fb, ba, bb, a, b, f1, f2
    cdef long t1, t2
    cdef double sep
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
            if ba < bb:
                a = ba
                b = bb
                f1 = fa
                f2 = fb
            else:
                a = bb
                b = ba
                f1 = fb
                f2 = fa
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
                man_buf[nman, 0] = <double> a
                man_buf[nman, 1] = <double> b
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


cdef void _resolve_velocity(double[:, ::1] pos, double[:, ::1] vel,
                            double[::1] angvel, double[::1] inv_mass,
                            double[::1] inv_inertia, double[:, ::1] man_buf,
                            Py_ssize_t nman, double restitution, double friction,
                            double rest_threshold) nogil:
    cdef Py_ssize_t it, m, a, b, p
    cdef int npts
    cdef double nx, ny, px, py, rax, ray, rbx, rby
    cdef double vax, vay, vbx, vby, rvx, rvy, vn, e, ran, rbn, denom, jn, jx, jy
    cdef double tx, ty, tlen, rat, rbt, denom_t, jt, maxf
    for it in range(2):
        for m in range(nman):
            a = <Py_ssize_t> man_buf[m, 0]
            b = <Py_ssize_t> man_buf[m, 1]
            nx = man_buf[m, 2]
            ny = man_buf[m, 3]
            npts = <int> man_buf[m, 5]
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
                vax = vel[a, 0] - angvel[a] * ray
                vay = vel[a, 1] + angvel[a] * rax
                vbx = vel[b, 0] - angvel[b] * rby
                vby = vel[b, 1] + angvel[b] * rbx
                rvx = vbx - vax
                rvy = vby - vay
                tx = rvx - (rvx * nx + rvy * ny) * nx
                ty = rvy - (rvx * nx + rvy * ny) * ny
                tlen = sqrt(tx * tx + ty * ty)
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


cdef void _positional_correction(double[:, ::1] pos, double[::1] inv_mass,
                                 double[:, ::1] man_buf, Py_ssize_t nman) nogil:
    cdef Py_ssize_t m, a, b
    cdef double nx, ny, depth, total, mag
    for m in range(nman):
        a = <Py_ssize_t> man_buf[m, 0]
        b = <Py_ssize_t> man_buf[m, 1]
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


def scan_contacts(double[:, ::1] pos, double[:, ::1] vel, double[::1] angle,
                  double[::1] angvel, double[::1] inv_mass, double[::1] inv_inertia,
                  long[::1] fix_body, long[::1] fix_type, double[::1] fix_radius,
                  long[::1] fix_vstart, long[::1] fix_vcount,
                  double[:, ::1] verts_local, double[:, ::1] verts_world,
                  double[:, ::1] pair_sep, double[:, :, ::1] pair_data,
                  double[:, ::1] man_buf, double tol):
    cdef Py_ssize_t nf = fix_body.shape[0]
    cdef Py_ssize_t nb = pair_sep.shape[0]
    cdef Py_ssize_t a, b
    _update_world_verts(pos, angle, fix_body, fix_type, fix_vstart, fix_vcount,
                        verts_local, verts_world, nf)
    _detect_pairs(pos, angle, fix_body, fix_type, fix_radius, fix_vstart, fix_vcount,
                  verts_local, verts_world, inv_mass, nf, tol, pair_sep, pair_data, man_buf)
    result = []
    for a in range(nb):
        for b in range(a + 1, nb):
            if pair_sep[a, b] <= tol:
                result.append((a, b, int(pair_data[a, b, 4]), pair_data[a, b, 0],
                               pair_data[a, b, 1], pair_data[a, b, 2], pair_data[a, b, 3]))
    return result


def step_world(double[:, ::1] pos, double[:, ::1] vel, double[::1] angle,
               double[::1] angvel, double[::1] inv_mass, double[::1] inv_inertia,
               long[::1] fix_body, long[::1] fix_type, double[::1] fix_radius,
               long[::1] fix_vstart, long[::1] fix_vcount,
               double[:, ::1] verts_local, double[:, ::1] verts_world,
               unsigned char[:, ::1] active, double[:, :, ::1] last_cp,
               double dt, int substeps, double gravity_y, double restitution,
               double friction, double tol, double vel_cap, double rest_threshold,
               double[:, ::1] pair_sep, double[:, :, ::1] pair_data,
               double[:, ::1] man_buf):
    cdef Py_ssize_t nb = pos.shape[0]
    cdef Py_ssize_t nf = fix_body.shape[0]
    cdef double h = dt / substeps
    cdef Py_ssize_t nman
    cdef int sub, now, was
    cdef Py_ssize_t i, a, b
    cdef double sp2, scale
    records = []
    for sub in range(substeps):
        _update_world_verts(pos, angle, fix_body, fix_type, fix_vstart, fix_vcount,
                            verts_local, verts_world, nf)
        nman = _detect_pairs(pos, angle, fix_body, fix_type, fix_radius, fix_vstart,
                             fix_vcount, verts_local, verts_world, inv_mass, nf, tol,
                             pair_sep, pair_data, man_buf)

        for a in range(nb):
            for b in range(a + 1, nb):
                if inv_mass[a] == 0.0 and inv_mass[b] == 0.0:
                    continue
                now = 1 if pair_sep[a, b] <= tol else 0
                was = active[a, b]
                if now == was:
                    continue
                active[a, b] = <unsigned char> now
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

        for i in range(nb):
            if inv_mass[i] > 0.0:
                vel[i, 1] = vel[i, 1] - gravity_y * h
                sp2 = vel[i, 0] * vel[i, 0] + vel[i, 1] * vel[i, 1]
                if sp2 > vel_cap * vel_cap:
                    scale = vel_cap / sqrt(sp2)
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
