"""Pure-Python pixel kernels; reference fallback for ``_kernels``."""

import numpy as np

INF = 1e300

# Moore neighbourhood, clockwise on screen (rows grow downward), starting west.
DR = (0, -1, -1, -1, 0, 1, 1, 1)
DC = (-1, -1, 0, 1, 1, 1, 0, -1)
_DIRECTION = {(dr, dc): j for j, (dr, dc) in enumerate(zip(DR, DC))}


def _find(parent, x):
    root = x
    while parent[root] != root:
        root = parent[root]
    while parent[x] != root:
        parent[x], x = root, parent[x]
    return root


def _union(parent, a, b):
    a, b = _find(parent, a), _find(parent, b)
    if a < b:
        parent[b] = a
    elif b < a:
        parent[a] = b


def label(mask, connectivity=8):
    """Two-pass union-find labelling; labels follow raster order of first pixel."""
    m = np.asarray(mask).astype(bool).tolist()
    h = len(m)
    w = len(m[0]) if h else 0
    labels = [[0] * w for _ in range(h)]
    parent = [0]
    eight = connectivity == 8
    for r in range(h):
        row, lab = m[r], labels[r]
        up = labels[r - 1] if r else None
        for c in range(w):
            if not row[c]:
                continue
            cur = lab[c - 1] if c else 0
            if up is not None:
                cands = [up[c]]
                if eight:
                    if c:
                        cands.append(up[c - 1])
                    if c + 1 < w:
                        cands.append(up[c + 1])
                for nb in cands:
                    if nb:
                        if cur:
                            _union(parent, cur, nb)
                        else:
                            cur = nb
            if not cur:
                cur = len(parent)
                parent.append(cur)
            lab[c] = cur
    remap = {}
    for r in range(h):
        lab = labels[r]
        for c in range(w):
            if lab[c]:
                root = _find(parent, lab[c])
                if root not in remap:
                    remap[root] = len(remap) + 1
                lab[c] = remap[root]
    return np.array(labels, dtype=np.int32).reshape(h, w), len(remap)


def trace(mask, sr, sc):
    """Moore boundary trace from (sr, sc), the first pixel in raster order."""
    m = np.asarray(mask).astype(bool)
    h, w = m.shape
    cr, cc, back = sr, sc, 0
    first = None
    out = [(sr, sc)]
    while True:
        for k in range(1, 9):
            d = (back + k) % 8
            nr, nc = cr + DR[d], cc + DC[d]
            if 0 <= nr < h and 0 <= nc < w and m[nr, nc]:
                break
        else:
            return out
        if (cr, cc) == (sr, sc):
            if first is None:
                first = (nr, nc)
            elif (nr, nc) == first:
                return out[:-1]
        d = (back + k - 1) % 8
        back = _DIRECTION[(cr + DR[d] - nr, cc + DC[d] - nc)]
        cr, cc = nr, nc
        out.append((cr, cc))


def _dt1d(f):
    n = len(f)
    v, z = [], []
    for q in range(n):
        fq = f[q]
        if fq >= INF:
            continue
        while v:
            p = v[-1]
            s = ((fq + q * q) - (f[p] + p * p)) / (2.0 * (q - p))
            if s <= z[-1]:
                v.pop()
                z.pop()
                continue
            break
        else:
            s = -INF
        v.append(q)
        z.append(s)
    if not v:
        return [INF] * n
    z.append(INF)
    out = [0.0] * n
    k = 0
    for q in range(n):
        while z[k + 1] < q:
            k += 1
        p = v[k]
        out[q] = (q - p) * (q - p) + f[p]
    return out


def squared_edt(sites):
    """Squared Euclidean distance from every pixel to the nearest nonzero site."""
    s = np.asarray(sites).astype(bool)
    h, w = s.shape
    cols = [_dt1d([0.0 if s[r, c] else INF for r in range(h)]) for c in range(w)]
    out = np.empty((h, w), dtype=np.float64)
    for r in range(h):
        out[r] = _dt1d([cols[c][r] for c in range(w)])
    return out
