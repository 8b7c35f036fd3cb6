# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled search kernel; semantics identical to ``_kernel_py``."""

import numpy as np

from libc.math cimport exp
from libc.stdint cimport int64_t, uint64_t
from libc.stdlib cimport free, malloc

cdef enum:
    REPLACEMENT_DAYS = 7


cdef struct Rng:
    uint64_t s0, s1, s2, s3


cdef inline uint64_t _splitmix(uint64_t* state) noexcept nogil:
    state[0] += 0x9E3779B97F4A7C15ULL
    cdef uint64_t z = state[0]
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL
    return z ^ (z >> 31)


cdef inline uint64_t _rotl(uint64_t x, int k) noexcept nogil:
    return (x << k) | (x >> (64 - k))


cdef inline void _seed(Rng* r, uint64_t seed) noexcept nogil:
    cdef uint64_t st = seed
    r.s0 = _splitmix(&st)
    r.s1 = _splitmix(&st)
    r.s2 = _splitmix(&st)
    r.s3 = _splitmix(&st)


cdef inline uint64_t _next(Rng* r) noexcept nogil:
    cdef uint64_t result = _rotl(r.s1 * 5, 7) * 9
    cdef uint64_t t = r.s1 << 17
    r.s2 ^= r.s0
    r.s3 ^= r.s1
    r.s1 ^= r.s2
    r.s0 ^= r.s3
    r.s2 ^= t
    r.s3 = _rotl(r.s3, 45)
    return result


cdef inline double _uniform(Rng* r) noexcept nogil:
    return <double>(_next(r) >> 11) * (1.0 / 9007199254740992.0)


cdef inline Py_ssize_t _below(Rng* r, uint64_t n) noexcept nogil:
    # (u53 * n) >> 53 without 128-bit arithmetic: n < 2**11 keeps the product in 64 bits
    return <Py_ssize_t>(((_next(r) >> 11) * n) >> 53)


cdef struct Inst:
    Py_ssize_t n_mat, n_sup, k
    int64_t* cap
    int64_t* dem
    int64_t* cost
    int64_t* dfct
    int64_t* dly
    int64_t cost_den, defect_den, delay_den, cd
    double w1, w2


cdef inline int64_t _floordiv(int64_t a, int64_t b) noexcept nogil:
    cdef int64_t q = a / b
    if (a % b != 0) and ((a < 0) != (b < 0)):
        q -= 1
    return q


cdef bint _evaluate(Inst* ins, Py_ssize_t* order, int64_t* out) noexcept nogil:
    cdef int64_t pc_num = 0, defects = 0, days = 0, remaining, q, c
    cdef Py_ssize_t j, pos, s, base
    for j in range(ins.n_mat):
        remaining = ins.dem[j]
        base = j * ins.n_sup
        for pos in range(ins.k):
            if remaining <= 0:
                break
            s = order[pos]
            c = ins.cap[base + s]
            q = c if c < remaining else remaining
            remaining -= q
            pc_num += ins.cost[base + s] * q
            defects += _floordiv(2 * ins.dfct[base + s] * q + ins.defect_den, 2 * ins.defect_den)
            days += -_floordiv(-ins.dly[base + s] * q, ins.delay_den)
        if remaining > 0:
            return 0
    out[0] = _floordiv(2 * pc_num + ins.cost_den, 2 * ins.cost_den)
    out[1] = defects
    out[2] = days
    return 1


cdef double _score(Inst* ins, int64_t* ev, int mode, int64_t c_ref) noexcept nogil:
    cdef int64_t quality = REPLACEMENT_DAYS * ins.cd if ev[1] > 0 else 0
    cdef int64_t delay = ev[2] * ins.cd
    cdef int64_t total = ev[0] + quality + delay
    if total <= 0:
        return 1.0
    if mode == 0:
        return <double>c_ref / <double>total
    return (<double>total / <double>(total + quality)) * ins.w1 + \
        (<double>total / <double>(total + delay)) * ins.w2


cdef Inst _make_inst(ci, int64_t[:, ::1] cap, int64_t[::1] dem, int64_t[:, ::1] cost,
                     int64_t[:, ::1] dfct, int64_t[:, ::1] dly):
    cdef Inst ins
    ins.n_mat = cap.shape[0]
    ins.n_sup = cap.shape[1]
    ins.k = ci.k
    ins.cap = &cap[0, 0]
    ins.dem = &dem[0]
    ins.cost = &cost[0, 0]
    ins.dfct = &dfct[0, 0]
    ins.dly = &dly[0, 0]
    ins.cost_den = ci.cost_den
    ins.defect_den = ci.defect_den
    ins.delay_den = ci.delay_den
    ins.cd = ci.delay_cost_rate
    ins.w1 = ci.weight1
    ins.w2 = ci.weight2
    return ins


def _arrays(ci):
    return (np.ascontiguousarray(ci.capacity, dtype=np.int64),
            np.ascontiguousarray(ci.demand, dtype=np.int64),
            np.ascontiguousarray(ci.cost, dtype=np.int64),
            np.ascontiguousarray(ci.defect, dtype=np.int64),
            np.ascontiguousarray(ci.delay, dtype=np.int64))


def evaluate(ci, ranks):
    cap, dem, cost, dfct, dly = _arrays(ci)
    cdef Inst ins = _make_inst(ci, cap, dem, cost, dfct, dly)
    cdef Py_ssize_t n = len(ranks), i
    cdef Py_ssize_t* order = <Py_ssize_t*>malloc(n * sizeof(Py_ssize_t))
    cdef int64_t ev[3]
    try:
        for i in range(n):
            order[ranks[i] - 1] = i
        if not _evaluate(&ins, order, ev):
            return False, 0, 0, 0
        return True, ev[0], ev[1], ev[2]
    finally:
        free(order)


def run_chain(ci, ranks0, double t_init, double alpha, Py_ssize_t markov_len, double t_min,
              Py_ssize_t max_iters, Py_ssize_t stagnation_limit, uint64_t seed, int mode,
              int64_t c_ref):
    cap, dem, cost, dfct, dly = _arrays(ci)
    cdef Inst ins = _make_inst(ci, cap, dem, cost, dfct, dly)
    cdef Py_ssize_t n = len(ranks0)
    if n >= 2048:
        raise ValueError("compiled kernel supports fewer than 2048 suppliers")

    temps_a = np.empty(max_iters + 1, dtype=np.float64)
    cur_a = np.empty(max_iters + 1, dtype=np.float64)
    best_a = np.empty(max_iters + 1, dtype=np.float64)
    acc_a = np.empty(max_iters + 1, dtype=np.uint8)
    best_r = np.empty(n, dtype=np.int64)
    cur_r = np.array(ranks0, dtype=np.int64)
    cdef double[::1] temps = temps_a
    cdef double[::1] curs = cur_a
    cdef double[::1] bests = best_a
    cdef unsigned char[::1] accs = acc_a
    cdef int64_t[::1] best = best_r
    cdef int64_t[::1] cur = cur_r

    cdef Py_ssize_t* order = <Py_ssize_t*>malloc(n * sizeof(Py_ssize_t))
    cdef int64_t ev[3]
    cdef Rng rng
    cdef Py_ssize_t i, j, x, it = 0, count, stag = 0, rec = 0
    cdef int64_t tmp
    cdef double t = t_init, cur_score, best_score, score, delta, r
    cdef bint stop = 0, ok, acc, improved

    try:
        for i in range(n):
            order[cur[i] - 1] = i
        with nogil:
            ok = _evaluate(&ins, order, ev)
        if not ok:
            raise ValueError("initial ranking is infeasible")
        with nogil:
            _seed(&rng, seed)
            cur_score = _score(&ins, ev, mode, c_ref)
            best_score = cur_score
            for x in range(n):
                best[x] = cur[x]
            temps[0] = t
            curs[0] = cur_score
            bests[0] = best_score
            accs[0] = 1
            rec = 1
            while not stop and t >= t_min and t > 0.0:
                count = 0
                while count < markov_len:
                    if it >= max_iters or stag >= stagnation_limit:
                        stop = 1
                        break
                    i = _below(&rng, n)
                    j = _below(&rng, n)
                    while j == i:
                        j = _below(&rng, n)
                    # candidate = cur with ranks of suppliers i, j exchanged
                    order[cur[j] - 1] = i
                    order[cur[i] - 1] = j
                    it += 1
                    count += 1

                    acc = 0
                    improved = 0
                    ok = _evaluate(&ins, order, ev)
                    if not ok:
                        stag += 1
                    else:
                        score = _score(&ins, ev, mode, c_ref)
                        if score > best_score:
                            best_score = score
                            acc = 1
                            improved = 1
                            stag = 0
                        elif score == best_score:
                            acc = 1
                            stag += 1
                        else:
                            delta = score - cur_score
                            r = _uniform(&rng)
                            if delta >= 0.0 or exp(delta / t) > r:
                                acc = 1
                            stag += 1
                    if acc:
                        tmp = cur[i]
                        cur[i] = cur[j]
                        cur[j] = tmp
                        cur_score = score
                        if improved:
                            for x in range(n):
                                best[x] = cur[x]
                    else:
                        order[cur[i] - 1] = i
                        order[cur[j] - 1] = j
                    temps[rec] = t
                    curs[rec] = cur_score
                    bests[rec] = best_score
                    accs[rec] = acc
                    rec += 1
                if not stop:
                    t = alpha * t
    finally:
        free(order)

    return (best_r.tolist(), best_score, temps_a[:rec].tolist(), cur_a[:rec].tolist(),
            best_a[:rec].tolist(), acc_a[:rec].tolist())
