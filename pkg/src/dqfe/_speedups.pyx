# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled hot kernels: statevector gate updates and the tree grower.

Mirrors ``dqfe._kernels_numpy`` operation for operation (same SplitMix64
stream, same multiply/add ordering, compiled with -ffp-contract=off), so
the two backends are interchangeable.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport INFINITY, cos, sin, sqrt
from libc.stdlib cimport free, malloc, qsort
from libc.string cimport memset

cnp.import_array()

BACKEND = "compiled"

ctypedef double complex cplx

cdef extern from "complex.h" nogil:
    double complex CMPLX(double, double)

cdef unsigned long long GOLDEN = 0x9E3779B97F4A7C15ULL
cdef unsigned long long MIX1 = 0xBF58476D1CE4E5B9ULL
cdef unsigned long long MIX2 = 0x94D049BB133111EBULL
cdef double DOUBLE_SCALE = 2.0 ** -53


cdef inline double _next_double(unsigned long long* state) noexcept nogil:
    cdef unsigned long long z
    state[0] = state[0] + GOLDEN
    z = state[0]
    z = (z ^ (z >> 30)) * MIX1
    z = (z ^ (z >> 27)) * MIX2
    z = z ^ (z >> 31)
    return <double>(z >> 11) * DOUBLE_SCALE


cdef inline Py_ssize_t _randbelow(unsigned long long* state, Py_ssize_t bound) noexcept nogil:
    cdef Py_ssize_t j = <Py_ssize_t>(_next_double(state) * bound)
    return j if j < bound else bound - 1


# ---------------------------------------------------------------------------
# Gate kernels.  Rotations implement exp(-i*angle/2 * P); qubit 0 is the
# least significant index bit; buffers are updated in place.
# ---------------------------------------------------------------------------

def apply_ry(cplx[::1] amps, int q, double angle):
    cdef Py_ssize_t size = amps.shape[0]
    cdef Py_ssize_t stride = (<Py_ssize_t>1) << q
    cdef double c = cos(angle / 2.0), s = sin(angle / 2.0)
    cdef Py_ssize_t base = 0, off, k0, k1
    cdef cplx a0, a1
    with nogil:
        while base < size:
            for off in range(stride):
                k0 = base + off
                k1 = k0 + stride
                a0 = amps[k0]
                a1 = amps[k1]
                amps[k0] = c * a0 - s * a1
                amps[k1] = s * a0 + c * a1
            base += 2 * stride


def apply_rx(cplx[::1] amps, int q, double angle):
    cdef Py_ssize_t size = amps.shape[0]
    cdef Py_ssize_t stride = (<Py_ssize_t>1) << q
    cdef double c = cos(angle / 2.0)
    cdef cplx ms = CMPLX(0.0, -sin(angle / 2.0))
    cdef Py_ssize_t base = 0, off, k0, k1
    cdef cplx a0, a1
    with nogil:
        while base < size:
            for off in range(stride):
                k0 = base + off
                k1 = k0 + stride
                a0 = amps[k0]
                a1 = amps[k1]
                amps[k0] = c * a0 + ms * a1
                amps[k1] = ms * a0 + c * a1
            base += 2 * stride


def apply_h(cplx[::1] amps, int q):
    cdef Py_ssize_t size = amps.shape[0]
    cdef Py_ssize_t stride = (<Py_ssize_t>1) << q
    cdef double r = 1.0 / sqrt(2.0)
    cdef Py_ssize_t base = 0, off, k0, k1
    cdef cplx a0, a1
    with nogil:
        while base < size:
            for off in range(stride):
                k0 = base + off
                k1 = k0 + stride
                a0 = amps[k0]
                a1 = amps[k1]
                amps[k0] = (a0 + a1) * r
                amps[k1] = (a0 - a1) * r
            base += 2 * stride


def apply_rzz(cplx[::1] amps, int qa, int qb, double angle):
    cdef Py_ssize_t size = amps.shape[0]
    cdef double half = angle / 2.0
    cdef cplx p0 = CMPLX(cos(half), -sin(half))
    cdef cplx p1 = CMPLX(cos(half), sin(half))
    cdef Py_ssize_t k
    with nogil:
        for k in range(size):
            if ((k >> qa) ^ (k >> qb)) & 1:
                amps[k] = amps[k] * p1
            else:
                amps[k] = amps[k] * p0


def apply_ryz(cplx[::1] amps, int qy, int qz, double angle):
    cdef Py_ssize_t size = amps.shape[0]
    cdef Py_ssize_t stride = (<Py_ssize_t>1) << qy
    cdef double c = cos(angle / 2.0), s = sin(angle / 2.0)
    cdef double sz
    cdef Py_ssize_t base = 0, off, k0, k1
    cdef cplx a0, a1
    with nogil:
        while base < size:
            for off in range(stride):
                k0 = base + off
                k1 = k0 + stride
                sz = -s if ((k0 >> qz) & 1) else s
                a0 = amps[k0]
                a1 = amps[k1]
                amps[k0] = c * a0 - sz * a1
                amps[k1] = sz * a0 + c * a1
            base += 2 * stride


# ---------------------------------------------------------------------------
# Decision-tree grower.
# ---------------------------------------------------------------------------

cdef struct ValLab:
    double v
    long lab


cdef int _cmp_vallab(const void* a, const void* b) noexcept nogil:
    cdef double av = (<const ValLab*>a).v
    cdef double bv = (<const ValLab*>b).v
    if av < bv:
        return -1
    if av > bv:
        return 1
    return 0


def build_tree(const double[:, ::1] X, const long[::1] y, int n_classes,
               unsigned long long seed, int max_depth, int min_leaf,
               int k_features):
    """Grow one CART-style tree on a bootstrap resample.

    Identical contract and stream consumption to the NumPy fallback; see
    ``dqfe._kernels_numpy.build_tree``.
    """
    cdef Py_ssize_t m0 = X.shape[0], nf = X.shape[1]
    cdef Py_ssize_t max_nodes = 2 * m0 + 2

    feature_arr = np.full(max_nodes, -1, dtype=np.int32)
    threshold_arr = np.zeros(max_nodes)
    left_arr = np.full(max_nodes, -1, dtype=np.int32)
    right_arr = np.full(max_nodes, -1, dtype=np.int32)
    counts_arr = np.zeros((max_nodes, n_classes), dtype=np.int64)

    cdef int[::1] feature = feature_arr
    cdef double[::1] threshold = threshold_arr
    cdef int[::1] left = left_arr
    cdef int[::1] right = right_arr
    cdef long[:, ::1] counts = counts_arr

    cdef unsigned long long state = seed
    cdef Py_ssize_t stack_cap = 2 * m0 + 4
    cdef double* Xb = <double*>malloc(m0 * nf * sizeof(double))
    cdef long* yb = <long*>malloc(m0 * sizeof(long))
    cdef Py_ssize_t* idx = <Py_ssize_t*>malloc(m0 * sizeof(Py_ssize_t))
    cdef Py_ssize_t* scratch = <Py_ssize_t*>malloc(m0 * sizeof(Py_ssize_t))
    cdef ValLab* pairs = <ValLab*>malloc(m0 * sizeof(ValLab))
    cdef long* cnt = <long*>malloc(n_classes * sizeof(long))
    cdef long* lc = <long*>malloc(n_classes * sizeof(long))
    cdef Py_ssize_t* perm = <Py_ssize_t*>malloc(nf * sizeof(Py_ssize_t))
    cdef Py_ssize_t* cand = <Py_ssize_t*>malloc(nf * sizeof(Py_ssize_t))
    cdef Py_ssize_t* st_lo = <Py_ssize_t*>malloc(stack_cap * sizeof(Py_ssize_t))
    cdef Py_ssize_t* st_hi = <Py_ssize_t*>malloc(stack_cap * sizeof(Py_ssize_t))
    cdef int* st_depth = <int*>malloc(stack_cap * sizeof(int))
    cdef int* st_nid = <int*>malloc(stack_cap * sizeof(int))
    if (Xb == NULL or yb == NULL or idx == NULL or scratch == NULL or
            pairs == NULL or cnt == NULL or lc == NULL or perm == NULL or
            cand == NULL or st_lo == NULL or st_hi == NULL or
            st_depth == NULL or st_nid == NULL):
        free(Xb); free(yb); free(idx); free(scratch); free(pairs)
        free(cnt); free(lc); free(perm); free(cand)
        free(st_lo); free(st_hi); free(st_depth); free(st_nid)
        raise MemoryError("tree builder scratch allocation failed")

    cdef int node_count = 1
    cdef Py_ssize_t sp, t, j, f, c, lo, hi, mn, ncand, nl, tmp_i
    cdef int depth, nid, lid, rid, best_f
    cdef double u, best_w, best_thr, accl, accr, pl, pr, wsum, gl, gr
    cdef double vprev, vcur
    cdef long maxcnt
    cdef bint is_leaf

    with nogil:
        for t in range(m0):
            u = _next_double(&state)
            j = <Py_ssize_t>(u * m0)
            if j >= m0:
                j = m0 - 1
            for f in range(nf):
                Xb[t * nf + f] = X[j, f]
            yb[t] = y[j]
        for t in range(m0):
            idx[t] = t

        st_lo[0] = 0
        st_hi[0] = m0
        st_depth[0] = 0
        st_nid[0] = 0
        sp = 1
        while sp > 0:
            sp -= 1
            lo = st_lo[sp]
            hi = st_hi[sp]
            depth = st_depth[sp]
            nid = st_nid[sp]
            mn = hi - lo

            memset(cnt, 0, n_classes * sizeof(long))
            for t in range(lo, hi):
                cnt[yb[idx[t]]] += 1
            maxcnt = 0
            for c in range(n_classes):
                counts[nid, c] = cnt[c]
                if cnt[c] > maxcnt:
                    maxcnt = cnt[c]

            is_leaf = False
            if max_depth >= 0 and depth >= max_depth:
                is_leaf = True
            elif mn < 2 * min_leaf:
                is_leaf = True
            elif maxcnt == mn:
                is_leaf = True
            if is_leaf:
                continue

            # candidate feature subset (partial Fisher-Yates, then sorted)
            if k_features >= nf:
                ncand = nf
                for t in range(nf):
                    cand[t] = t
            else:
                ncand = k_features
                for t in range(nf):
                    perm[t] = t
                for t in range(k_features):
                    j = t + _randbelow(&state, nf - t)
                    tmp_i = perm[t]
                    perm[t] = perm[j]
                    perm[j] = tmp_i
                for t in range(k_features):
                    cand[t] = perm[t]
                for t in range(1, k_features):
                    tmp_i = cand[t]
                    j = t
                    while j > 0 and cand[j - 1] > tmp_i:
                        cand[j] = cand[j - 1]
                        j -= 1
                    cand[j] = tmp_i

            best_f = -1
            best_thr = 0.0
            best_w = INFINITY
            for t in range(ncand):
                f = cand[t]
                for j in range(mn):
                    pairs[j].v = Xb[idx[lo + j] * nf + f]
                    pairs[j].lab = yb[idx[lo + j]]
                qsort(pairs, mn, sizeof(ValLab), _cmp_vallab)
                memset(lc, 0, n_classes * sizeof(long))
                for j in range(1, mn):
                    lc[pairs[j - 1].lab] += 1
                    vprev = pairs[j - 1].v
                    vcur = pairs[j].v
                    if vprev < vcur and j >= min_leaf and mn - j >= min_leaf:
                        accl = 0.0
                        accr = 0.0
                        for c in range(n_classes):
                            pl = (<double>lc[c]) / (<double>j)
                            accl = accl + pl * pl
                            pr = (<double>(cnt[c] - lc[c])) / (<double>(mn - j))
                            accr = accr + pr * pr
                        gl = 1.0 - accl
                        gr = 1.0 - accr
                        wsum = ((<double>j) * gl + (<double>(mn - j)) * gr) / (<double>mn)
                        if wsum < best_w:
                            best_w = wsum
                            best_f = <int>f
                            best_thr = 0.5 * (vprev + vcur)

            if best_f < 0:
                # no candidate column had a valid boundary (all constant)
                continue

            # stable partition by value <= threshold
            nl = 0
            for t in range(lo, hi):
                if Xb[idx[t] * nf + best_f] <= best_thr:
                    scratch[nl] = idx[t]
                    nl += 1
            j = nl
            for t in range(lo, hi):
                if not (Xb[idx[t] * nf + best_f] <= best_thr):
                    scratch[j] = idx[t]
                    j += 1
            for t in range(mn):
                idx[lo + t] = scratch[t]
            if nl == 0 or nl == mn:
                continue

            feature[nid] = best_f
            threshold[nid] = best_thr
            lid = node_count
            rid = node_count + 1
            node_count += 2
            left[nid] = lid
            right[nid] = rid
            # push right, then left: left pops first
            st_lo[sp] = lo + nl
            st_hi[sp] = hi
            st_depth[sp] = depth + 1
            st_nid[sp] = rid
            sp += 1
            st_lo[sp] = lo
            st_hi[sp] = lo + nl
            st_depth[sp] = depth + 1
            st_nid[sp] = lid
            sp += 1

    free(Xb); free(yb); free(idx); free(scratch); free(pairs)
    free(cnt); free(lc); free(perm); free(cand)
    free(st_lo); free(st_hi); free(st_depth); free(st_nid)

    return (
        feature_arr[:node_count].copy(),
        threshold_arr[:node_count].copy(),
        left_arr[:node_count].copy(),
        right_arr[:node_count].copy(),
        counts_arr[:node_count].copy(),
        node_count,
    )
