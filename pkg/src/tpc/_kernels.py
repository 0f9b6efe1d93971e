"""Compiled hot loops: syndrome BDD, Chase-2 list decoding, soft outputs.

Candidates are stored as sorted *flip sets* relative to the hard decision r,
so the correlation metric of a candidate c is

    corr(c) = corr(r) - 2 * sum_{j in F_c} |l_j|

and the per-candidate cost ``m_c = sum_{j in F_c} |l_j|`` is minimized.
The Pyndiah soft output then reduces to w_i = d_i (m_alt - m_d) - l_i.
"""

import numpy as np
from numba import njit

INF = np.inf


@njit(cache=True, inline="always")
def _gmul(a, b, alog, logt):
    if a == 0 or b == 0:
        return 0
    return alog[logt[a] + logt[b]]


@njit(cache=True)
def bdd_from_syndromes(S, parity, t, ncyc, q1, alog, logt, pw, max_dist, locs, C, B, T):
    """Bounded-distance decode given syndromes S[0..2t) and overall parity.

    Writes error positions into ``locs`` and returns their count, or -1 on
    failure.  Position ``ncyc`` is the overall-parity bit.  A correction is
    accepted only if it changes at most ``max_dist`` bits: max_dist = t is
    plain BDD, t + 1 also accepts t cyclic errors plus a parity mismatch.
    For t == 0 the code is a single parity check.
    """
    if t == 0:
        return 0 if parity == 0 else -1
    nsyn = 2 * t
    allzero = True
    for j in range(nsyn):
        if S[j] != 0:
            allzero = False
            break
    if allzero:
        if parity == 0:
            return 0
        locs[0] = ncyc
        return 1

    # Berlekamp-Massey
    for i in range(nsyn + 1):
        C[i] = 0
        B[i] = 0
    C[0] = 1
    B[0] = 1
    L = 0
    m = 1
    b = 1
    for r in range(nsyn):
        d = S[r]
        for i in range(1, L + 1):
            d ^= _gmul(C[i], S[r - i], alog, logt)
        if d == 0:
            m += 1
            continue
        coef = _gmul(d, alog[q1 - logt[b]], alog, logt)
        if 2 * L <= r:
            for i in range(nsyn + 1):
                T[i] = C[i]
            for i in range(m, nsyn + 1):
                C[i] ^= _gmul(coef, B[i - m], alog, logt)
            L = r + 1 - L
            for i in range(nsyn + 1):
                B[i] = T[i]
            b = d
            m = 1
        else:
            for i in range(m, nsyn + 1):
                C[i] ^= _gmul(coef, B[i - m], alog, logt)
            m += 1
    if L > t or L == 0:
        return -1
    for i in range(L + 1, nsyn + 1):
        if C[i] != 0:
            return -1
    if C[L] == 0:
        return -1

    # Chien search over exponents e: root alpha^{-e} <=> error at exponent e
    nroots = 0
    if L == 1:
        e = logt[C[1]]
        if e < ncyc:
            locs[0] = ncyc - 1 - e
            nroots = 1
    else:
        # T holds log C[i] (or -1 for zero coefficients), advanced by -i per step
        for i in range(1, L + 1):
            T[i] = logt[C[i]] if C[i] != 0 else -1
        for e in range(ncyc):
            val = 1
            for i in range(1, L + 1):
                if T[i] >= 0:
                    val ^= alog[T[i]]
                    T[i] -= i
                    if T[i] < 0:
                        T[i] += q1
            if val == 0:
                locs[nroots] = ncyc - 1 - e
                nroots += 1
                if nroots == L:
                    break
    if nroots != L:
        return -1

    # explicit verification: corrected word must have zero syndromes
    for j in range(nsyn):
        s = S[j]
        for k in range(L):
            s ^= pw[j, locs[k]]
        if s != 0:
            return -1
    nc = L
    if (parity ^ (L & 1)) == 1:
        locs[nc] = ncyc
        nc += 1
    if nc > max_dist:
        return -1
    return nc


@njit(cache=True)
def syndromes_of(bits, t, ncyc, pw, S):
    for j in range(2 * t):
        S[j] = 0
    for idx in range(ncyc):
        if bits[idx]:
            for j in range(2 * t):
                S[j] ^= pw[j, idx]
    par = 0
    for idx in range(bits.shape[0]):
        par ^= bits[idx]
    return par


@njit(cache=True)
def bdd_word(bits, t, ncyc, q1, alog, logt, pw, max_dist, out):
    """BDD of one hard word; writes the codeword into ``out``. Returns success."""
    nsyn = max(2 * t, 1)
    S = np.zeros(nsyn, np.int64)
    C = np.zeros(nsyn + 1, np.int64)
    B = np.zeros(nsyn + 1, np.int64)
    T = np.zeros(nsyn + 1, np.int64)
    locs = np.zeros(t + 2, np.int64)
    par = syndromes_of(bits, t, ncyc, pw, S)
    nc = bdd_from_syndromes(S, par, t, ncyc, q1, alog, logt, pw, max_dist, locs, C, B, T)
    if nc < 0:
        return False
    for j in range(bits.shape[0]):
        out[j] = bits[j]
    for k in range(nc):
        out[locs[k]] ^= 1
    return True


@njit(cache=True)
def _chase_core(
    l, p, patterns, t, ncyc, q1, alog, logt, pw, max_dist,
    r, a, lrb, S0, S, C, B, T, locs,
    cand_pos, cand_size, cand_m, fbuf,
):
    """Build the deduplicated Chase-2 candidate list for one LLR vector.

    Returns the number of candidates; their flip sets are in cand_pos /
    cand_size, sorted ascending, with costs cand_m.
    """
    n = l.shape[0]
    for j in range(n):
        r[j] = 1 if l[j] < 0 else 0
        a[j] = abs(l[j])
    # p least reliable positions, ascending reliability, ties -> lowest index
    for b in range(p):
        best = -1
        bv = INF
        for j in range(n):
            if a[j] < bv:
                used = False
                for q in range(b):
                    if lrb[q] == j:
                        used = True
                        break
                if not used:
                    bv = a[j]
                    best = j
        if best < 0:
            # only reachable with infinite magnitudes; take first unused index
            for j in range(n):
                used = False
                for q in range(b):
                    if lrb[q] == j:
                        used = True
                        break
                if not used:
                    best = j
                    break
        lrb[b] = best

    nsyn = 2 * t
    par0 = syndromes_of(r, t, ncyc, pw, S0)
    ncand = 0
    for pi in range(patterns.shape[0]):
        mask = patterns[pi]
        par = par0
        for j in range(nsyn):
            S[j] = S0[j]
        nf = 0
        for b in range(p):
            if (mask >> b) & 1:
                idx = lrb[b]
                par ^= 1
                if idx < ncyc:
                    for j in range(nsyn):
                        S[j] ^= pw[j, idx]
                fbuf[nf] = idx
                nf += 1
        nc = bdd_from_syndromes(S, par, t, ncyc, q1, alog, logt, pw, max_dist, locs, C, B, T)
        if nc < 0:
            continue
        # flip set = test pattern XOR corrections
        for k in range(nc):
            pos = locs[k]
            found = -1
            for q in range(nf):
                if fbuf[q] == pos:
                    found = q
                    break
            if found >= 0:
                nf -= 1
                fbuf[found] = fbuf[nf]
            else:
                fbuf[nf] = pos
                nf += 1
        # insertion sort
        for q in range(1, nf):
            v = fbuf[q]
            s = q - 1
            while s >= 0 and fbuf[s] > v:
                fbuf[s + 1] = fbuf[s]
                s -= 1
            fbuf[s + 1] = v
        mc = 0.0
        for q in range(nf):
            mc += a[fbuf[q]]
        dup = False
        for c in range(ncand):
            if cand_m[c] == mc and cand_size[c] == nf:
                same = True
                for q in range(nf):
                    if cand_pos[c, q] != fbuf[q]:
                        same = False
                        break
                if same:
                    dup = True
                    break
        if dup:
            continue
        for q in range(nf):
            cand_pos[ncand, q] = fbuf[q]
        cand_size[ncand] = nf
        cand_m[ncand] = mc
        ncand += 1
    return ncand


@njit(cache=True)
def _soft_from_candidates(
    l, r, ncand, cand_pos, cand_size, cand_m, dbits, w, alt, best, ind, inc
):
    """Pyndiah soft output from a nonempty candidate list. Returns d's index."""
    n = l.shape[0]
    di = 0
    for c in range(1, ncand):
        if cand_m[c] < cand_m[di]:
            di = c
    md = cand_m[di]
    for j in range(n):
        best[j] = INF
        ind[j] = 0
        inc[j] = 0
    for q in range(cand_size[di]):
        ind[cand_pos[di, q]] = 1
    for c in range(ncand):
        if c == di:
            continue
        mc = cand_m[c]
        for q in range(cand_size[c]):
            j = cand_pos[c, q]
            inc[j] = 1
            if ind[j] == 0 and mc < best[j]:
                best[j] = mc
        for q in range(cand_size[di]):
            j = cand_pos[di, q]
            if inc[j] == 0 and mc < best[j]:
                best[j] = mc
        for q in range(cand_size[c]):
            inc[cand_pos[c, q]] = 0
    for j in range(n):
        dbits[j] = r[j] ^ ind[j]
        dj = 1.0 - 2.0 * dbits[j]
        if best[j] < INF:
            w[j] = dj * (best[j] - md) - l[j]
            alt[j] = True
        else:
            w[j] = dj
            alt[j] = False
    return di


@njit(cache=True)
def chase_rows(L, p, patterns, t, ncyc, q1, alog, logt, pw, max_dist, dbits, W, ALT, lsize):
    """Chase-Pyndiah soft output for every row of L (rows x n).

    Rows whose candidate list is empty get d = r, w = 0, alt = False and
    lsize = 0.
    """
    R, n = L.shape
    nsyn = max(2 * t, 1)
    maxc = patterns.shape[0]
    fcap = p + t + 2
    r = np.zeros(n, np.uint8)
    a = np.zeros(n)
    lrb = np.zeros(max(p, 1), np.int64)
    S0 = np.zeros(nsyn, np.int64)
    S = np.zeros(nsyn, np.int64)
    C = np.zeros(nsyn + 1, np.int64)
    B = np.zeros(nsyn + 1, np.int64)
    T = np.zeros(nsyn + 1, np.int64)
    locs = np.zeros(t + 2, np.int64)
    cand_pos = np.zeros((maxc, fcap), np.int64)
    cand_size = np.zeros(maxc, np.int64)
    cand_m = np.zeros(maxc)
    fbuf = np.zeros(fcap, np.int64)
    best = np.zeros(n)
    ind = np.zeros(n, np.uint8)
    inc = np.zeros(n, np.uint8)
    for row in range(R):
        l = L[row]
        nc = _chase_core(
            l, p, patterns, t, ncyc, q1, alog, logt, pw, max_dist,
            r, a, lrb, S0, S, C, B, T, locs, cand_pos, cand_size, cand_m, fbuf,
        )
        lsize[row] = nc
        if nc == 0:
            for j in range(n):
                dbits[row, j] = r[j]
                W[row, j] = 0.0
                ALT[row, j] = False
            continue
        _soft_from_candidates(
            l, r, nc, cand_pos, cand_size, cand_m,
            dbits[row], W[row], ALT[row], best, ind, inc,
        )


@njit(cache=True)
def chase_rows_extrinsic(
    Lin, Lch, p, patterns, t, ncyc, q1, alog, logt, pw, max_dist, dbits, W, ALT, empty
):
    """Per-position extrinsic variant: output i comes from a Chase run on
    Lin[row] with entry i replaced by Lch[row, i].

    ``empty[row, i]`` flags positions whose own candidate list was empty
    (then w = 0, alt = False, d_i = hard decision).
    """
    R, n = Lin.shape
    nsyn = max(2 * t, 1)
    maxc = patterns.shape[0]
    fcap = p + t + 2
    r = np.zeros(n, np.uint8)
    a = np.zeros(n)
    lrb = np.zeros(max(p, 1), np.int64)
    S0 = np.zeros(nsyn, np.int64)
    S = np.zeros(nsyn, np.int64)
    C = np.zeros(nsyn + 1, np.int64)
    B = np.zeros(nsyn + 1, np.int64)
    T = np.zeros(nsyn + 1, np.int64)
    locs = np.zeros(t + 2, np.int64)
    cand_pos = np.zeros((maxc, fcap), np.int64)
    cand_size = np.zeros(maxc, np.int64)
    cand_m = np.zeros(maxc)
    fbuf = np.zeros(fcap, np.int64)
    best = np.zeros(n)
    ind = np.zeros(n, np.uint8)
    inc = np.zeros(n, np.uint8)
    lp = np.zeros(n)
    db = np.zeros(n, np.uint8)
    wb = np.zeros(n)
    ab = np.zeros(n, np.bool_)
    # outputs of the unmodified run, reused wherever the replacement is a no-op
    db0 = np.zeros(n, np.uint8)
    wb0 = np.zeros(n)
    ab0 = np.zeros(n, np.bool_)
    for row in range(R):
        have_base = False
        nc0 = 0
        for i in range(n):
            if Lch[row, i] == Lin[row, i]:
                if not have_base:
                    for j in range(n):
                        lp[j] = Lin[row, j]
                    nc0 = _chase_core(
                        lp, p, patterns, t, ncyc, q1, alog, logt, pw, max_dist,
                        r, a, lrb, S0, S, C, B, T, locs,
                        cand_pos, cand_size, cand_m, fbuf,
                    )
                    if nc0 > 0:
                        _soft_from_candidates(
                            lp, r, nc0, cand_pos, cand_size, cand_m,
                            db0, wb0, ab0, best, ind, inc,
                        )
                    else:
                        for j in range(n):
                            db0[j] = r[j]
                            wb0[j] = 0.0
                            ab0[j] = False
                    have_base = True
                dbits[row, i] = db0[i]
                W[row, i] = wb0[i]
                ALT[row, i] = ab0[i]
                empty[row, i] = nc0 == 0
                continue
            for j in range(n):
                lp[j] = Lin[row, j]
            lp[i] = Lch[row, i]
            nc = _chase_core(
                lp, p, patterns, t, ncyc, q1, alog, logt, pw, max_dist,
                r, a, lrb, S0, S, C, B, T, locs, cand_pos, cand_size, cand_m, fbuf,
            )
            if nc == 0:
                dbits[row, i] = r[i]
                W[row, i] = 0.0
                ALT[row, i] = False
                empty[row, i] = True
                continue
            _soft_from_candidates(
                lp, r, nc, cand_pos, cand_size, cand_m, db, wb, ab, best, ind, inc
            )
            dbits[row, i] = db[i]
            W[row, i] = wb[i]
            ALT[row, i] = ab[i]
            empty[row, i] = False


@njit(cache=True)
def chase_candidates(l, p, patterns, t, ncyc, q1, alog, logt, pw, max_dist):
    """Candidate list of one vector as (flip positions, sizes, costs, r)."""
    n = l.shape[0]
    nsyn = max(2 * t, 1)
    maxc = patterns.shape[0]
    fcap = p + t + 2
    r = np.zeros(n, np.uint8)
    a = np.zeros(n)
    lrb = np.zeros(max(p, 1), np.int64)
    cand_pos = np.zeros((maxc, fcap), np.int64)
    cand_size = np.zeros(maxc, np.int64)
    cand_m = np.zeros(maxc)
    nc = _chase_core(
        l, p, patterns, t, ncyc, q1, alog, logt, pw, max_dist,
        r, a, lrb,
        np.zeros(nsyn, np.int64), np.zeros(nsyn, np.int64),
        np.zeros(nsyn + 1, np.int64), np.zeros(nsyn + 1, np.int64),
        np.zeros(nsyn + 1, np.int64), np.zeros(t + 2, np.int64),
        cand_pos, cand_size, cand_m, np.zeros(fcap, np.int64),
    )
    return cand_pos[:nc], cand_size[:nc], cand_m[:nc], r, lrb[:p]


@njit(cache=True)
def softplus_sum(scale, w, l):
    """sum_k log(1 + exp(-(scale * w_k + l_k))), numerically stable."""
    acc = 0.0
    for k in range(w.shape[0]):
        u = scale * w[k] + l[k]
        if u > 0:
            acc += np.log1p(np.exp(-u))
        else:
            acc += -u + np.log1p(np.exp(u))
    return acc
