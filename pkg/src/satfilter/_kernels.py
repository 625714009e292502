"""Numba kernels for the Monte Carlo solvers and clause-space counting.

Clause bookkeeping follows the usual trick: ``num_true[c]`` holds the number
of true literals in clause c, so the energy delta of a single flip only
touches the clauses the variable occurs in, and a flip updates the counts in
the same pass. The SQA kernels keep one ``num_true`` row and one cached
energy per imaginary-time slice.

All randomness comes from a ``np.random.Generator`` passed in by the caller;
passing the same generator state reproduces runs bit for bit.
"""

from __future__ import annotations

import numpy as np
from numba import njit

# ---------------------------------------------------------------- energy核

@njit(cache=True, inline="always")
def _count_true_single(bits, lit_var, lit_neg, cl_indptr, num_true):
    m = cl_indptr.size - 1
    e = 0
    for c in range(m):
        cnt = 0
        for idx in range(cl_indptr[c], cl_indptr[c + 1]):
            if bits[lit_var[idx]] != lit_neg[idx]:
                cnt += 1
        num_true[c] = cnt
        if cnt == 0:
            e += 1
    return e


@njit(cache=True, inline="always")
def _delta_single(i, bits, num_true, occ_indptr, occ_clause, occ_neg):
    d = 0
    b = bits[i]
    for idx in range(occ_indptr[i], occ_indptr[i + 1]):
        c = occ_clause[idx]
        if b != occ_neg[idx]:
            if num_true[c] == 1:
                d += 1
        else:
            if num_true[c] == 0:
                d -= 1
    return d


@njit(cache=True, inline="always")
def _flip_single(i, bits, num_true, occ_indptr, occ_clause, occ_neg):
    bits[i] ^= 1
    b = bits[i]
    for idx in range(occ_indptr[i], occ_indptr[i + 1]):
        c = occ_clause[idx]
        if b != occ_neg[idx]:
            num_true[c] += 1
        else:
            num_true[c] -= 1


# -------------------------------------------------------------------- SA

@njit(cache=True)
def sa_run(n, lit_var, lit_neg, cl_indptr, occ_indptr, occ_clause, occ_neg, betas, rng):
    """One simulated-annealing run; returns (bits, energy, best-so-far trace)."""
    mcs = betas.size
    bits = np.empty(n, np.uint8)
    for i in range(n):
        bits[i] = rng.integers(0, 2)
    m = cl_indptr.size - 1
    num_true = np.zeros(m, np.int16)
    e = _count_true_single(bits, lit_var, lit_neg, cl_indptr, num_true)
    best = e
    trace = np.empty(mcs, np.int64)
    for t in range(mcs):
        beta = betas[t]
        perm = rng.permutation(n)
        for j in range(n):
            i = perm[j]
            d = _delta_single(i, bits, num_true, occ_indptr, occ_clause, occ_neg)
            if d <= 0 or rng.random() < np.exp(-beta * np.float64(d)):
                _flip_single(i, bits, num_true, occ_indptr, occ_clause, occ_neg)
                e += d
        if e < best:
            best = e
        trace[t] = best
    return bits, e, trace


@njit(cache=True)
def sa_state_histogram(n, lit_var, lit_neg, cl_indptr, occ_indptr, occ_clause, occ_neg,
                       beta, sweeps, rng):
    """Fixed-temperature chain; counts the state after every sweep (n <= 20)."""
    bits = np.empty(n, np.uint8)
    for i in range(n):
        bits[i] = rng.integers(0, 2)
    m = cl_indptr.size - 1
    num_true = np.zeros(m, np.int16)
    _count_true_single(bits, lit_var, lit_neg, cl_indptr, num_true)
    counts = np.zeros(1 << n, np.int64)
    for _ in range(sweeps):
        perm = rng.permutation(n)
        for j in range(n):
            i = perm[j]
            d = _delta_single(i, bits, num_true, occ_indptr, occ_clause, occ_neg)
            if d <= 0 or rng.random() < np.exp(-beta * np.float64(d)):
                _flip_single(i, bits, num_true, occ_indptr, occ_clause, occ_neg)
        state = 0
        for i in range(n):
            state |= np.int64(bits[i]) << i
        counts[state] += 1
    return counts


# ------------------------------------------------------------------- SQA

@njit(cache=True, inline="always")
def _count_true_slice(p, spins, lit_var, lit_neg, cl_indptr, num_true):
    m = cl_indptr.size - 1
    e = 0
    for c in range(m):
        cnt = 0
        for idx in range(cl_indptr[c], cl_indptr[c + 1]):
            if spins[lit_var[idx], p] != lit_neg[idx]:
                cnt += 1
        num_true[p, c] = cnt
        if cnt == 0:
            e += 1
    return e


@njit(cache=True, inline="always")
def _delta_slice(i, p, spins, num_true, occ_indptr, occ_clause, occ_neg):
    d = 0
    b = spins[i, p]
    for idx in range(occ_indptr[i], occ_indptr[i + 1]):
        c = occ_clause[idx]
        if b != occ_neg[idx]:
            if num_true[p, c] == 1:
                d += 1
        else:
            if num_true[p, c] == 0:
                d -= 1
    return d


@njit(cache=True, inline="always")
def _flip_slice(i, p, spins, num_true, occ_indptr, occ_clause, occ_neg):
    spins[i, p] ^= 1
    b = spins[i, p]
    for idx in range(occ_indptr[i], occ_indptr[i + 1]):
        c = occ_clause[idx]
        if b != occ_neg[idx]:
            num_true[p, c] += 1
        else:
            num_true[p, c] -= 1


@njit(cache=True)
def sqa_run(n, lit_var, lit_neg, cl_indptr, occ_indptr, occ_clause, occ_neg,
            gammas, p_joins, j_perps, beta, slices, spatial, rng):
    """One simulated-quantum-annealing run over `slices` imaginary-time replicas.

    Per sweep and per site, adjacent aligned replicas bond with probability
    1 - tanh(Gamma * beta/slices); the cluster holding a uniformly random
    slice is flipped as a whole, accepted on the mean classical delta across
    its member slices. A non-positive Gamma means infinite inter-slice
    coupling: the whole chain moves as one locked cluster (misaligned chains
    are first projected onto the value of a random slice), which reduces the
    dynamics to single-replica annealing at fixed beta.

    Returns (spins, per-slice energies, best-so-far trace); the caller picks
    the readout slice.
    """
    mcs = gammas.size
    M = slices
    spins = np.empty((n, M), np.uint8)
    if gammas[0] <= 0.0:
        for i in range(n):
            v = rng.integers(0, 2)
            for p in range(M):
                spins[i, p] = np.uint8(v)
    else:
        for p in range(M):
            for i in range(n):
                spins[i, p] = rng.integers(0, 2)
    m = cl_indptr.size - 1
    num_true = np.zeros((M, m), np.int16)
    energies = np.empty(M, np.int64)
    for p in range(M):
        energies[p] = _count_true_slice(p, spins, lit_var, lit_neg, cl_indptr, num_true)
    best = energies[0]
    for p in range(1, M):
        if energies[p] < best:
            best = energies[p]
    trace = np.empty(mcs, np.int64)
    bond = np.empty(M - 1, np.uint8)
    deltas = np.empty(M, np.int64)

    for t in range(mcs):
        gamma = gammas[t]
        pj = p_joins[t]
        perm = rng.permutation(n)
        for jj in range(n):
            i = perm[jj]
            if gamma <= 0.0:
                aligned = True
                v0 = spins[i, 0]
                for p in range(1, M):
                    if spins[i, p] != v0:
                        aligned = False
                        break
                if not aligned:
                    u = rng.integers(0, M)
                    v = spins[i, u]
                    for p in range(M):
                        if spins[i, p] != v:
                            d = _delta_slice(i, p, spins, num_true, occ_indptr, occ_clause, occ_neg)
                            _flip_slice(i, p, spins, num_true, occ_indptr, occ_clause, occ_neg)
                            energies[p] += d
                a = 0
                b = M - 1
            else:
                for p in range(M - 1):
                    if spins[i, p] == spins[i, p + 1] and rng.random() < pj:
                        bond[p] = 1
                    else:
                        bond[p] = 0
                u = rng.integers(0, M)
                a = u
                while a > 0 and bond[a - 1] == 1:
                    a -= 1
                b = u
                while b < M - 1 and bond[b] == 1:
                    b += 1
            dsum = 0
            for p in range(a, b + 1):
                d = _delta_slice(i, p, spins, num_true, occ_indptr, occ_clause, occ_neg)
                deltas[p] = d
                dsum += d
            accept = False
            if dsum <= 0:
                accept = True
            elif rng.random() < np.exp(-beta * (np.float64(dsum) / np.float64(M))):
                accept = True
            if accept:
                for p in range(a, b + 1):
                    _flip_slice(i, p, spins, num_true, occ_indptr, occ_clause, occ_neg)
                    energies[p] += deltas[p]

        if spatial and gamma > 0.0:
            jp = j_perps[t]
            for p in range(M):
                for jj in range(n):
                    i = perm[jj]
                    d = _delta_slice(i, p, spins, num_true, occ_indptr, occ_clause, occ_neg)
                    s = 2.0 * np.float64(spins[i, p]) - 1.0
                    nbr = 0.0
                    if p > 0:
                        nbr += 2.0 * np.float64(spins[i, p - 1]) - 1.0
                    if p < M - 1:
                        nbr += 2.0 * np.float64(spins[i, p + 1]) - 1.0
                    dact = np.float64(d) / np.float64(M) + 2.0 * jp * s * nbr
                    if dact <= 0.0 or rng.random() < np.exp(-beta * dact):
                        _flip_slice(i, p, spins, num_true, occ_indptr, occ_clause, occ_neg)
                        energies[p] += d

        cur = energies[0]
        for p in range(1, M):
            if energies[p] < cur:
                cur = energies[p]
        if cur < best:
            best = cur
        trace[t] = best

    return spins, energies, trace


@njit(cache=True)
def sqa_sample_sz(n, lit_var, lit_neg, cl_indptr, occ_indptr, occ_clause, occ_neg,
                  gamma, beta, slices, sweeps, warmup, periodic, rng):
    """Equilibrium sampler at fixed transverse field; returns mean of the
    +/-1 spin over all sites, slices and post-warmup sweeps.

    With ``periodic`` the replica chain closes into a ring, which realizes
    the quantum trace; the open chain (the annealing default) carries free
    ends and different boundary statistics.
    """
    M = slices
    dtau = beta / M
    pj = 1.0 - np.tanh(gamma * dtau)
    spins = np.empty((n, M), np.uint8)
    for p in range(M):
        for i in range(n):
            spins[i, p] = rng.integers(0, 2)
    m = cl_indptr.size - 1
    num_true = np.zeros((M, m), np.int16)
    energies = np.empty(M, np.int64)
    for p in range(M):
        energies[p] = _count_true_slice(p, spins, lit_var, lit_neg, cl_indptr, num_true)
    n_bonds = M if periodic else M - 1
    bond = np.empty(max(n_bonds, 1), np.uint8)
    deltas = np.empty(M, np.int64)
    member = np.empty(M, np.int64)

    total = 0.0
    measured = 0
    for t in range(sweeps):
        perm = rng.permutation(n)
        for jj in range(n):
            i = perm[jj]
            for p in range(n_bonds):
                q = (p + 1) % M
                if spins[i, p] == spins[i, q] and rng.random() < pj:
                    bond[p] = 1
                else:
                    bond[p] = 0
            u = rng.integers(0, M)
            size = 1
            member[0] = u
            # walk left then right; on a ring stop after M members
            a = u
            while size < M:
                prev = (a - 1) % M
                if prev == M - 1 and not periodic:
                    break
                if a == 0 and not periodic:
                    break
                if bond[(a - 1) % M] == 0:
                    break
                a = prev
                member[size] = a
                size += 1
            b = u
            while size < M:
                if b == M - 1 and not periodic:
                    break
                if bond[b % M] == 0:
                    break
                nxt = (b + 1) % M
                if nxt == a and periodic:
                    break
                b = nxt
                member[size] = b
                size += 1
            dsum = 0
            for idx in range(size):
                p = member[idx]
                d = _delta_slice(i, p, spins, num_true, occ_indptr, occ_clause, occ_neg)
                deltas[p] = d
                dsum += d
            if dsum <= 0 or rng.random() < np.exp(-beta * (np.float64(dsum) / np.float64(M))):
                for idx in range(size):
                    p = member[idx]
                    _flip_slice(i, p, spins, num_true, occ_indptr, occ_clause, occ_neg)
                    energies[p] += deltas[p]
        if t >= warmup:
            acc = 0
            for i in range(n):
                for p in range(M):
                    acc += np.int64(spins[i, p])
            total += 2.0 * acc - np.float64(n * M)
            measured += 1
    return total / (np.float64(measured) * np.float64(n * M))


# --------------------------------------------------------------- WalkSAT

@njit(cache=True)
def walksat_run(n, lit_var, lit_neg, cl_indptr, occ_indptr, occ_clause, occ_neg,
                noise, max_flips, bits, rng,
                trace_on, trace_break, trace_min_break, trace_had_zero):
    """SKC WalkSAT; flips ``bits`` in place, returns (flips, unsat count).

    Trace arrays (when ``trace_on``) record per flip the chosen variable's
    break count, the clause's minimum break count, and whether a zero-break
    variable existed; sized max_flips by the caller.
    """
    m = cl_indptr.size - 1
    num_true = np.zeros(m, np.int16)
    e = _count_true_single(bits, lit_var, lit_neg, cl_indptr, num_true)
    unsat = np.empty(max(m, 1), np.int64)
    where = np.full(max(m, 1), -1, np.int64)
    cnt = 0
    for c in range(m):
        if num_true[c] == 0:
            unsat[cnt] = c
            where[c] = cnt
            cnt += 1
    maxw = 0
    for c in range(m):
        w = cl_indptr[c + 1] - cl_indptr[c]
        if w > maxw:
            maxw = w
    breaks = np.empty(max(maxw, 1), np.int64)
    flips = 0
    while cnt > 0 and flips < max_flips:
        c = unsat[rng.integers(0, cnt)]
        start = cl_indptr[c]
        width = cl_indptr[c + 1] - start
        for tpos in range(width):
            v = lit_var[start + tpos]
            brk = 0
            for idx in range(occ_indptr[v], occ_indptr[v + 1]):
                cc = occ_clause[idx]
                if bits[v] != occ_neg[idx] and num_true[cc] == 1:
                    brk += 1
            breaks[tpos] = brk
        order = rng.permutation(width)
        chosen = -1
        min_break = breaks[0]
        for tpos in range(width):
            if breaks[tpos] < min_break:
                min_break = breaks[tpos]
        if min_break == 0:
            for tpos in range(width):
                pos = order[tpos]
                if breaks[pos] == 0:
                    chosen = pos
                    break
        elif rng.random() < noise:
            chosen = order[0]
        else:
            bestb = np.int64(1) << 60
            for tpos in range(width):
                pos = order[tpos]
                if breaks[pos] < bestb:
                    bestb = breaks[pos]
                    chosen = pos
        if trace_on:
            trace_break[flips] = breaks[chosen]
            trace_min_break[flips] = min_break
            trace_had_zero[flips] = 1 if min_break == 0 else 0
        v = lit_var[start + chosen]
        bits[v] ^= 1
        bnew = bits[v]
        for idx in range(occ_indptr[v], occ_indptr[v + 1]):
            cc = occ_clause[idx]
            if bnew != occ_neg[idx]:
                num_true[cc] += 1
                if num_true[cc] == 1:
                    pos = where[cc]
                    last = unsat[cnt - 1]
                    unsat[pos] = last
                    where[last] = pos
                    cnt -= 1
                    where[cc] = -1
            else:
                num_true[cc] -= 1
                if num_true[cc] == 0:
                    unsat[cnt] = cc
                    where[cc] = cnt
                    cnt += 1
        flips += 1
    return flips, cnt


# ------------------------------------------------------- clause counting

@njit(cache=True)
def fpr_prefix_curve(bits, subsets):
    """False-positive rate of filters built from growing solution prefixes.

    ``bits`` is (s, n) with one stored assignment per row; ``subsets`` is
    (C, k) with k <= 5. For each variable subset the kernel tracks the set
    of distinct solution projections as a bitmask; a clause is a false
    positive iff its falsified pattern never occurs among the solutions.
    """
    C = subsets.shape[0]
    k = subsets.shape[1]
    s = bits.shape[0]
    masks = np.zeros(C, np.int64)
    out = np.empty(s, np.float64)
    denom = np.float64(C) * np.float64(1 << k)
    distinct = 0
    for i in range(s):
        for c in range(C):
            code = 0
            for j in range(k):
                code |= np.int64(bits[i, subsets[c, j]]) << j
            flag = np.int64(1) << code
            if masks[c] & flag == 0:
                masks[c] |= flag
                distinct += 1
        out[i] = (denom - np.float64(distinct)) / denom
    return out


@njit(cache=True)
def sampled_fpr_hits(bits, k, samples, rng):
    """Count sampled uniform clauses satisfied by every stored assignment."""
    s, n = bits.shape
    scratch = np.empty(n, np.int64)
    negs = np.empty(k, np.uint8)
    hits = 0
    for _ in range(samples):
        for i in range(n):
            scratch[i] = i
        for j in range(k):
            u = j + rng.integers(0, n - j)
            tmp = scratch[j]
            scratch[j] = scratch[u]
            scratch[u] = tmp
            negs[j] = rng.integers(0, 2)
        ok = True
        for i in range(s):
            sat = False
            for j in range(k):
                if bits[i, scratch[j]] != negs[j]:
                    sat = True
                    break
            if not sat:
                ok = False
                break
        if ok:
            hits += 1
    return hits


@njit(cache=True)
def distinct_projection_count(bits, subsets):
    """Total number of distinct solution projections across the subsets."""
    C = subsets.shape[0]
    k = subsets.shape[1]
    s = bits.shape[0]
    total = 0
    for c in range(C):
        mask = np.int64(0)
        for i in range(s):
            code = 0
            for j in range(k):
                code |= np.int64(bits[i, subsets[c, j]]) << j
            mask |= np.int64(1) << code
        while mask != 0:
            mask &= mask - 1
            total += 1
    return total
