"""Hot loops.

Functions decorated with ``@jit`` are numba kernels under the default
backend and plain Python otherwise.  The ``*_np`` functions are vectorised
numpy counterparts of the Monte-Carlo kernels; with ``CLTBLOCK_BACKEND=numpy``
the estimators call those instead of running the loop kernels interpreted.

Conventions: a live-path sample is a pair of ``(R, n)`` int32 parent arrays
(``-1`` = no chosen in-edge).  States are int8: 0 inactive, 1 +active,
-1 -active.
"""

from __future__ import annotations

import numpy as np

from ._backend import jit

# ---------------------------------------------------------------------------
# live-path sampling


@jit
def sample_parents(in_ptr, in_src, cum, u):
    """Pick at most one in-neighbour per node: edge e wins when u < cum[e]."""
    R, n = u.shape
    out = np.full((R, n), -1, np.int32)
    for r in range(R):
        for v in range(n):
            x = u[r, v]
            for e in range(in_ptr[v], in_ptr[v + 1]):
                if x < cum[e]:
                    out[r, v] = in_src[e]
                    break
    return out


def sample_parents_np(in_ptr, in_src, cum, u):
    R, n = u.shape
    deg = np.diff(in_ptr)
    if len(in_src) == 0:
        return np.full((R, n), -1, np.int32)
    dst = np.repeat(np.arange(n), deg)
    below = cum[None, :] <= u[:, dst]
    cs = np.zeros((R, len(in_src) + 1), np.int64)
    np.cumsum(below, axis=1, out=cs[:, 1:])
    count = cs[:, in_ptr[1:]] - cs[:, in_ptr[:-1]]
    idx = np.minimum(in_ptr[:-1][None, :] + count, len(in_src) - 1)
    return np.where(count < deg[None, :], in_src[idx], -1).astype(np.int32)


@jit
def children_csr(parents):
    """Invert parent arrays into per-run child lists (counting sort)."""
    R, n = parents.shape
    ptr = np.zeros((R, n + 1), np.int32)
    idx = np.empty((R, n), np.int32)
    fill = np.empty(n, np.int32)
    for r in range(R):
        for v in range(n):
            p = parents[r, v]
            if p >= 0:
                ptr[r, p + 1] += 1
        for v in range(n):
            ptr[r, v + 1] += ptr[r, v]
        for v in range(n):
            fill[v] = ptr[r, v]
        for v in range(n):
            p = parents[r, v]
            if p >= 0:
                idx[r, fill[p]] = v
                fill[p] += 1
    return ptr, idx


# ---------------------------------------------------------------------------
# live-path activation


@jit
def bfs_activate(pptr, pidx, nptr, nidx, pos_seeds, neg_seeds, keep_states):
    """Layered activation on live-path samples.

    Each round the negative frontier claims its inactive children first,
    then the positive frontier claims what is left (negative dominance).
    Returns per-run -active counts, last active round, and optionally the
    full state matrix.
    """
    R = pptr.shape[0]
    n = pptr.shape[1] - 1
    state = np.zeros(n, np.int8)
    fp = np.empty(n, np.int32)
    gp = np.empty(n, np.int32)
    fn = np.empty(n, np.int32)
    gn = np.empty(n, np.int32)
    order = np.empty(n, np.int32)
    counts = np.zeros(R, np.int64)
    steps = np.zeros(R, np.int64)
    if keep_states:
        states = np.zeros((R, n), np.int8)
    else:
        states = np.zeros((0, n), np.int8)
    for r in range(R):
        k = 0
        ln = 0
        lp = 0
        for s in neg_seeds:
            state[s] = -1
            fn[ln] = s
            ln += 1
            order[k] = s
            k += 1
        for s in pos_seeds:
            state[s] = 1
            fp[lp] = s
            lp += 1
            order[k] = s
            k += 1
        cnt = ln
        t = 0
        last = 0
        while ln > 0 or lp > 0:
            t += 1
            mn = 0
            for i in range(ln):
                u = fn[i]
                for j in range(nptr[r, u], nptr[r, u + 1]):
                    c = nidx[r, j]
                    if state[c] == 0:
                        state[c] = -1
                        gn[mn] = c
                        mn += 1
                        order[k] = c
                        k += 1
            mp = 0
            for i in range(lp):
                u = fp[i]
                for j in range(pptr[r, u], pptr[r, u + 1]):
                    c = pidx[r, j]
                    if state[c] == 0:
                        state[c] = 1
                        gp[mp] = c
                        mp += 1
                        order[k] = c
                        k += 1
            if mn + mp > 0:
                last = t
            cnt += mn
            fn, gn = gn, fn
            fp, gp = gp, fp
            ln = mn
            lp = mp
        counts[r] = cnt
        steps[r] = last
        for i in range(k):
            if keep_states:
                states[r, order[i]] = state[order[i]]
            state[order[i]] = 0
    return counts, steps, states


def layered_states_np(pos, neg, pos_seeds, neg_seeds):
    """Vectorised twin of :func:`bfs_activate` working on parent arrays."""
    R, n = pos.shape
    state = np.zeros((R, n), np.int8)
    state[:, np.asarray(neg_seeds, np.int64)] = -1
    state[:, np.asarray(pos_seeds, np.int64)] = 1
    steps = np.zeros(R, np.int64)
    has_p, has_n = pos >= 0, neg >= 0
    pp, nn = np.where(has_p, pos, 0), np.where(has_n, neg, 0)
    front_p, front_n = state == 1, state == -1
    t = 0
    while front_p.any() or front_n.any():
        t += 1
        nf = (state == 0) & has_n & np.take_along_axis(front_n, nn, axis=1)
        state[nf] = -1
        pf = (state == 0) & has_p & np.take_along_axis(front_p, pp, axis=1)
        state[pf] = 1
        steps[nf.any(axis=1) | pf.any(axis=1)] = t
        front_p, front_n = pf, nf
    return state, steps


# ---------------------------------------------------------------------------
# threshold process


@jit
def threshold_runs(out_ptr, out_dst, out_wp, out_wn, theta_p, theta_n, coin,
                   pos_seeds, neg_seeds, random_tie):
    """Synchronous CLT rounds driven by explicit thresholds.

    A node fires positively once the positive weight from +active
    in-neighbours reaches its positive threshold (negative likewise).
    Simultaneous firing goes negative unless ``random_tie`` and the node's
    coin is >= 0.5.
    """
    R, n = theta_p.shape
    states = np.zeros((R, n), np.int8)
    steps = np.zeros(R, np.int64)
    acc_p = np.zeros(n)
    acc_n = np.zeros(n)
    state = np.zeros(n, np.int8)
    flag = np.zeros(n, np.int8)
    cand = np.empty(n, np.int64)
    fp = np.empty(n, np.int64)
    gp = np.empty(n, np.int64)
    fn = np.empty(n, np.int64)
    gn = np.empty(n, np.int64)
    for r in range(R):
        acc_p[:] = 0.0
        acc_n[:] = 0.0
        state[:] = 0
        lp = 0
        ln = 0
        for s in neg_seeds:
            state[s] = -1
            fn[ln] = s
            ln += 1
        for s in pos_seeds:
            state[s] = 1
            fp[lp] = s
            lp += 1
        t = 0
        last = 0
        while ln > 0 or lp > 0:
            t += 1
            nc = 0
            for i in range(ln):
                u = fn[i]
                for e in range(out_ptr[u], out_ptr[u + 1]):
                    x = out_dst[e]
                    if state[x] == 0:
                        acc_n[x] += out_wn[e]
                        if flag[x] == 0:
                            flag[x] = 1
                            cand[nc] = x
                            nc += 1
            for i in range(lp):
                u = fp[i]
                for e in range(out_ptr[u], out_ptr[u + 1]):
                    x = out_dst[e]
                    if state[x] == 0:
                        acc_p[x] += out_wp[e]
                        if flag[x] == 0:
                            flag[x] = 1
                            cand[nc] = x
                            nc += 1
            mn = 0
            mp = 0
            for i in range(nc):
                x = cand[i]
                flag[x] = 0
                nf = acc_n[x] >= theta_n[r, x]
                pf = acc_p[x] >= theta_p[r, x]
                if nf and pf and random_tie and coin[r, x] >= 0.5:
                    nf = False
                if nf:
                    state[x] = -1
                    gn[mn] = x
                    mn += 1
                elif pf:
                    state[x] = 1
                    gp[mp] = x
                    mp += 1
            if mn + mp > 0:
                last = t
            fn, gn = gn, fn
            fp, gp = gp, fp
            ln = mn
            lp = mp
        steps[r] = last
        states[r, :] = state
    return states, steps


def threshold_runs_np(in_ptr, in_src, w_p, w_n, theta_p, theta_n, coin,
                      pos_seeds, neg_seeds, random_tie):
    R, n = theta_p.shape
    state = np.zeros((R, n), np.int8)
    state[:, np.asarray(neg_seeds, np.int64)] = -1
    state[:, np.asarray(pos_seeds, np.int64)] = 1
    steps = np.zeros(R, np.int64)
    lo, hi = in_ptr[:-1], in_ptr[1:]

    def incoming(mask, w):
        contrib = np.zeros((R, len(in_src) + 1))
        np.cumsum(mask[:, in_src] * w, axis=1, out=contrib[:, 1:])
        return contrib[:, hi] - contrib[:, lo]

    t = 0
    while True:
        t += 1
        inactive = state == 0
        pf = inactive & (incoming(state == 1, w_p) >= theta_p)
        nf = inactive & (incoming(state == -1, w_n) >= theta_n)
        if random_tie:
            nf &= ~(pf & (coin >= 0.5))
        pf &= ~nf
        fired = pf.any(axis=1) | nf.any(axis=1)
        if not fired.any():
            break
        steps[fired] = t
        state[nf] = -1
        state[pf] = 1
    return state, steps


# ---------------------------------------------------------------------------
# LDAG construction


@jit
def _heap_better(k1, v1, k2, v2):
    return k1 > k2 or (k1 == k2 and v1 < v2)


@jit
def _heap_push(hk, hv, size, key, val):
    i = size
    hk[i] = key
    hv[i] = val
    while i > 0:
        parent = (i - 1) // 2
        if _heap_better(hk[i], hv[i], hk[parent], hv[parent]):
            hk[i], hk[parent] = hk[parent], hk[i]
            hv[i], hv[parent] = hv[parent], hv[i]
            i = parent
        else:
            break
    return size + 1


@jit
def _heap_pop(hk, hv, size):
    size -= 1
    hk[0] = hk[size]
    hv[0] = hv[size]
    i = 0
    while True:
        left = 2 * i + 1
        best = i
        if left < size and _heap_better(hk[left], hv[left], hk[best], hv[best]):
            best = left
        right = left + 1
        if right < size and _heap_better(hk[right], hv[right], hk[best], hv[best]):
            best = right
        if best == i:
            break
        hk[i], hk[best] = hk[best], hk[i]
        hv[i], hv[best] = hv[best], hv[i]
        i = best
    return size


@jit
def build_ldags(n, roots, theta, in_ptr, in_src, in_w, out_ptr, out_dst, out_w):
    """Run Find-LDAG for every root.

    Membership follows the greedy max-influence insertion with cut-off
    ``theta``.  Members are then laid out by a depth-first search from the
    root over in-arcs (reverse postorder), and every graph arc between two
    members is kept unless it is a back arc of that search.  On an acyclic
    graph no arc is lost.

    Members of root i occupy ``mem_idx[mem_ptr[i]:mem_ptr[i+1]]`` root
    first.  Arcs of the member at flat position f are
    ``arc_tgt/arc_w[arc_ptr[f]:arc_ptr[f+1]]``; targets are local indices of
    earlier members.
    """
    R = roots.shape[0]
    inf = np.zeros(n)
    pos = np.full(n, -1, np.int64)
    seen = np.zeros(n, np.uint8)
    touched = np.empty(n, np.int64)
    stk = np.empty(n, np.int64)
    cur = np.empty(n, np.int64)
    post = np.empty(n, np.int64)
    hcap = in_ptr[n] + 2
    hk = np.empty(hcap)
    hv = np.empty(hcap, np.int64)
    mem_ptr = np.zeros(R + 1, np.int64)
    cap_m = max(16, 4 * R)
    mem_idx = np.empty(cap_m, np.int64)
    mem_inf = np.empty(cap_m)
    cap_a = max(16, 4 * R)
    arc_tgt = np.empty(cap_a, np.int64)
    arc_w = np.empty(cap_a)
    arc_ptr = np.empty(cap_m + 1, np.int64)
    m = 0
    a = 0
    for ri in range(R):
        v = roots[ri]
        base = m
        nt = 0
        inf[v] = 1.0
        touched[nt] = v
        nt += 1
        hsize = _heap_push(hk, hv, 0, 1.0, v)
        while hsize > 0:
            key = hk[0]
            x = hv[0]
            if key < theta:
                break
            hsize = _heap_pop(hk, hv, hsize)
            if pos[x] >= 0 or key != inf[x]:
                continue
            if m >= mem_idx.shape[0]:
                grown = mem_idx.shape[0] * 2
                t1 = np.empty(grown, np.int64)
                t1[:m] = mem_idx[:m]
                mem_idx = t1
                t2 = np.empty(grown)
                t2[:m] = mem_inf[:m]
                mem_inf = t2
                t3 = np.empty(grown + 1, np.int64)
                t3[:base] = arc_ptr[:base]
                arc_ptr = t3
            pos[x] = m - base
            mem_idx[m] = x
            m += 1
            for e in range(in_ptr[x], in_ptr[x + 1]):
                u = in_src[e]
                w = in_w[e]
                if w > 0.0 and pos[u] < 0:
                    if inf[u] == 0.0:
                        touched[nt] = u
                        nt += 1
                    inf[u] += w * key
                    if inf[u] >= theta:
                        hsize = _heap_push(hk, hv, hsize, inf[u], u)
        # depth-first layout over in-arcs inside the member set
        ns = 1
        no = 0
        stk[0] = v
        cur[0] = in_ptr[v]
        seen[v] = 1
        while ns > 0:
            x = stk[ns - 1]
            e = cur[ns - 1]
            if e < in_ptr[x + 1]:
                cur[ns - 1] = e + 1
                u = in_src[e]
                if in_w[e] > 0.0 and pos[u] >= 0 and seen[u] == 0:
                    seen[u] = 1
                    stk[ns] = u
                    cur[ns] = in_ptr[u]
                    ns += 1
            else:
                post[no] = x
                no += 1
                ns -= 1
        for j in range(no):
            x = post[no - 1 - j]
            pos[x] = j
            mem_idx[base + j] = x
            mem_inf[base + j] = inf[x]
        for j in range(no):
            x = mem_idx[base + j]
            arc_ptr[base + j] = a
            for e in range(out_ptr[x], out_ptr[x + 1]):
                u = out_dst[e]
                if out_w[e] > 0.0 and pos[u] >= 0 and pos[u] < j:
                    if a >= arc_tgt.shape[0]:
                        grown = arc_tgt.shape[0] * 2
                        t4 = np.empty(grown, np.int64)
                        t4[:a] = arc_tgt[:a]
                        arc_tgt = t4
                        t5 = np.empty(grown)
                        t5[:a] = arc_w[:a]
                        arc_w = t5
                    arc_tgt[a] = pos[u]
                    arc_w[a] = out_w[e]
                    a += 1
        for f in range(base, m):
            pos[mem_idx[f]] = -1
            seen[mem_idx[f]] = 0
        for i in range(nt):
            inf[touched[i]] = 0.0
        mem_ptr[ri + 1] = m
    arc_ptr[m] = a
    return (mem_ptr, mem_idx[:m].copy(), mem_inf[:m].copy(), arc_ptr[:m + 1].copy(),
            arc_tgt[:a].copy(), arc_w[:a].copy())


@jit
def cross_maps(n, p_ptr, p_idx, q_ptr, q_idx):
    """For every member of the first table, its local index in the second (or -1)."""
    R = p_ptr.shape[0] - 1
    where = np.full(n, -1, np.int64)
    out = np.full(p_idx.shape[0], -1, np.int64)
    for i in range(R):
        for f in range(q_ptr[i], q_ptr[i + 1]):
            where[q_idx[f]] = f - q_ptr[i]
        for f in range(p_ptr[i], p_ptr[i + 1]):
            out[f] = where[p_idx[f]]
        for f in range(q_ptr[i], q_ptr[i + 1]):
            where[q_idx[f]] = -1
    return out


# ---------------------------------------------------------------------------
# Inf-CLDAG dynamic program

N_FLOAT_SCRATCH = 10
N_INT_SCRATCH = 6


@jit
def ldag_pair_dp(i, p_ptr, p_idx, p_arc_ptr, p_tgt, p_w, p_cross,
                 n_ptr, n_idx, n_arc_ptr, n_tgt, n_w, n_cross,
                 is_S, is_N0, fs, js):
    """Negative activation probability of root ``i`` inside its LDAG pair.

    Alternates one negative BFS level and one positive BFS level per round.
    Per-member running sums of P(x, t) stand in for the cumulative terms.
    ``fs``/``js`` are scratch; on return rows 4 and 9 of ``fs`` hold the
    total ap+ / ap- of every member, rows 0 and 5 the total P+ / P-.
    """
    bp = p_ptr[i]
    Lp = p_ptr[i + 1] - bp
    bn = n_ptr[i]
    Ln = n_ptr[i + 1] - bn
    cum_p = fs[0]
    acc_p = fs[1]
    cur_p = fs[2]
    nxt_p = fs[3]
    tot_p = fs[4]
    cum_n = fs[5]
    acc_n = fs[6]
    cur_n = fs[7]
    nxt_n = fs[8]
    tot_n = fs[9]
    qp = js[0]
    qp2 = js[1]
    qn = js[2]
    qn2 = js[3]
    flag_p = js[4]
    flag_n = js[5]
    for x in range(Lp):
        cum_p[x] = 0.0
        acc_p[x] = 0.0
        cur_p[x] = 0.0
        nxt_p[x] = 0.0
        tot_p[x] = 0.0
        flag_p[x] = 0
    for x in range(Ln):
        cum_n[x] = 0.0
        acc_n[x] = 0.0
        cur_n[x] = 0.0
        nxt_n[x] = 0.0
        tot_n[x] = 0.0
        flag_n[x] = 0
    lp = 0
    for x in range(Lp):
        if is_S[p_idx[bp + x]]:
            qp[lp] = x
            lp += 1
            cur_p[x] = 1.0
            tot_p[x] = 1.0
    ln = 0
    for x in range(Ln):
        if is_N0[n_idx[bn + x]]:
            qn[ln] = x
            ln += 1
            cur_n[x] = 1.0
            tot_n[x] = 1.0
    horizon = Lp + Ln + 1
    t = 0
    while (ln > 0 or lp > 0) and t < horizon:
        # negative level t -> t + 1
        mn = 0
        for k in range(ln):
            u = qn[k]
            a = cur_n[u]
            if a == 0.0:
                continue
            for e in range(n_arc_ptr[bn + u], n_arc_ptr[bn + u + 1]):
                x = n_tgt[e]
                g = n_idx[bn + x]
                if is_S[g] or is_N0[g]:
                    continue
                if flag_n[x] == 0:
                    flag_n[x] = 1
                    qn2[mn] = x
                    mn += 1
                acc_n[x] += n_w[e] * a
        for k in range(mn):
            x = qn2[k]
            flag_n[x] = 0
            c = n_cross[bn + x]
            before_p = cum_p[c] if c >= 0 else 0.0
            val = acc_n[x] * (1.0 - before_p)
            cum_n[x] += acc_n[x]
            acc_n[x] = 0.0
            nxt_n[x] = val
            tot_n[x] += val
        # positive level t -> t + 1, sees negative mass up to t + 1
        mp = 0
        for k in range(lp):
            u = qp[k]
            a = cur_p[u]
            if a == 0.0:
                continue
            for e in range(p_arc_ptr[bp + u], p_arc_ptr[bp + u + 1]):
                x = p_tgt[e]
                g = p_idx[bp + x]
                if is_S[g] or is_N0[g]:
                    continue
                if flag_p[x] == 0:
                    flag_p[x] = 1
                    qp2[mp] = x
                    mp += 1
                acc_p[x] += p_w[e] * a
        for k in range(mp):
            x = qp2[k]
            flag_p[x] = 0
            c = p_cross[bp + x]
            upto_n = cum_n[c] if c >= 0 else 0.0
            val = acc_p[x] * (1.0 - upto_n)
            cum_p[x] += acc_p[x]
            acc_p[x] = 0.0
            nxt_p[x] = val
            tot_p[x] += val
        for k in range(ln):
            cur_n[qn[k]] = 0.0
        for k in range(mn):
            x = qn2[k]
            cur_n[x] = nxt_n[x]
            nxt_n[x] = 0.0
        for k in range(lp):
            cur_p[qp[k]] = 0.0
        for k in range(mp):
            x = qp2[k]
            cur_p[x] = nxt_p[x]
            nxt_p[x] = 0.0
        qn, qn2 = qn2, qn
        qp, qp2 = qp2, qp
        ln = mn
        lp = mp
        t += 1
    return tot_n[0]


@jit
def decinf_accumulate(roots, p_ptr, p_idx, p_arc_ptr, p_tgt, p_w, p_cross,
                      n_ptr, n_idx, n_arc_ptr, n_tgt, n_w, n_cross,
                      has_neg, is_S, is_N0, delta, ap_base, decinf, fs, js):
    """DecInf(u) += ap-(v, S) - ap-(v, S + u) for every root v and u in LDAG+(v).

    Writes the per-(v, u) terms into ``delta`` (aligned with the positive
    member table) and ap-(v, S) into ``ap_base``.  Returns the number of
    dynamic-program evaluations.
    """
    calls = 0
    for i in range(roots.shape[0]):
        v = roots[i]
        bp = p_ptr[i]
        Lp = p_ptr[i + 1] - bp
        for f in range(bp, bp + Lp):
            delta[f] = 0.0
        if is_N0[v]:
            ap_base[i] = 1.0
            continue
        if not has_neg[i]:
            ap_base[i] = 0.0
            continue
        before = ldag_pair_dp(i, p_ptr, p_idx, p_arc_ptr, p_tgt, p_w, p_cross,
                              n_ptr, n_idx, n_arc_ptr, n_tgt, n_w, n_cross,
                              is_S, is_N0, fs, js)
        calls += 1
        ap_base[i] = before
        if before == 0.0:
            continue
        for f in range(bp, bp + Lp):
            u = p_idx[f]
            if is_S[u] or is_N0[u]:
                continue
            is_S[u] = 1
            after = ldag_pair_dp(i, p_ptr, p_idx, p_arc_ptr, p_tgt, p_w, p_cross,
                                 n_ptr, n_idx, n_arc_ptr, n_tgt, n_w, n_cross,
                                 is_S, is_N0, fs, js)
            is_S[u] = 0
            calls += 1
            delta[f] = before - after
            decinf[u] += before - after
    return calls


@jit
def decinf_update(s, entries, p_ptr, p_idx, p_arc_ptr, p_tgt, p_w, p_cross,
                  n_ptr, n_idx, n_arc_ptr, n_tgt, n_w, n_cross,
                  has_neg, is_S, is_N0, delta, ap_base, decinf, fs, js):
    """Fold seed ``s`` into S and refresh DecInf for the given root rows.

    ``entries`` lists table rows i whose LDAG+ contains ``s``.  For each
    member u the stored term ap-(v, S) - ap-(v, S + u) is swapped for
    ap-(v, S + s) - ap-(v, S + s + u).
    """
    is_S[s] = 1
    calls = 0
    for k in range(entries.shape[0]):
        i = entries[k]
        if not has_neg[i] or ap_base[i] == 0.0 or is_N0[p_idx[p_ptr[i]]]:
            continue
        bp = p_ptr[i]
        Lp = p_ptr[i + 1] - bp
        base = ldag_pair_dp(i, p_ptr, p_idx, p_arc_ptr, p_tgt, p_w, p_cross,
                            n_ptr, n_idx, n_arc_ptr, n_tgt, n_w, n_cross,
                            is_S, is_N0, fs, js)
        calls += 1
        for f in range(bp, bp + Lp):
            u = p_idx[f]
            d = 0.0
            if base > 0.0 and not is_S[u] and not is_N0[u]:
                is_S[u] = 1
                after = ldag_pair_dp(i, p_ptr, p_idx, p_arc_ptr, p_tgt, p_w, p_cross,
                                     n_ptr, n_idx, n_arc_ptr, n_tgt, n_w, n_cross,
                                     is_S, is_N0, fs, js)
                is_S[u] = 0
                calls += 1
                d = base - after
            decinf[u] += d - delta[f]
            delta[f] = d
        ap_base[i] = base
    return calls


@jit
def decinf_update_rebuilt(s, p_ptr, p_idx, p_arc_ptr, p_tgt, p_w, p_cross,
                          n_ptr, n_idx, n_arc_ptr, n_tgt, n_w, n_cross,
                          has_neg, is_S, is_N0, decinf, fs, js):
    """Same update as :func:`decinf_update` without stored terms.

    Used when LDAGs are rebuilt on demand: both the old and the new
    incremental reductions are recomputed.  ``is_S`` must not yet hold ``s``.
    """
    calls = 0
    for i in range(p_ptr.shape[0] - 1):
        if not has_neg[i] or is_N0[p_idx[p_ptr[i]]]:
            continue
        old_base = ldag_pair_dp(i, p_ptr, p_idx, p_arc_ptr, p_tgt, p_w, p_cross,
                                n_ptr, n_idx, n_arc_ptr, n_tgt, n_w, n_cross,
                                is_S, is_N0, fs, js)
        is_S[s] = 1
        new_base = ldag_pair_dp(i, p_ptr, p_idx, p_arc_ptr, p_tgt, p_w, p_cross,
                                n_ptr, n_idx, n_arc_ptr, n_tgt, n_w, n_cross,
                                is_S, is_N0, fs, js)
        is_S[s] = 0
        calls += 2
        if old_base == 0.0:
            continue
        for f in range(p_ptr[i], p_ptr[i + 1]):
            u = p_idx[f]
            if u == s or is_S[u] or is_N0[u]:
                continue
            is_S[u] = 1
            old_after = ldag_pair_dp(i, p_ptr, p_idx, p_arc_ptr, p_tgt, p_w, p_cross,
                                     n_ptr, n_idx, n_arc_ptr, n_tgt, n_w, n_cross,
                                     is_S, is_N0, fs, js)
            is_S[s] = 1
            new_after = 0.0
            if new_base > 0.0:
                new_after = ldag_pair_dp(i, p_ptr, p_idx, p_arc_ptr, p_tgt, p_w, p_cross,
                                         n_ptr, n_idx, n_arc_ptr, n_tgt, n_w, n_cross,
                                         is_S, is_N0, fs, js)
                calls += 1
            is_S[s] = 0
            is_S[u] = 0
            calls += 1
            decinf[u] += (new_base - new_after) - (old_base - old_after)
    return calls
