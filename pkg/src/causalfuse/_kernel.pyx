# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled witness search; same contract as ``_kernel_py.first_witness``.

Lanes (subsets W) are packed 64 per machine word.
"""
from libc.stdlib cimport malloc, free
from libc.stdint cimport uint64_t

cdef extern from *:
    int __builtin_popcountll(unsigned long long) nogil
    int __builtin_ctzll(unsigned long long) nogil

cdef enum:
    OP_VAR = 0
    OP_CONST = 1
    OP_NOT = 2
    OP_AND = 3
    OP_OR = 4
    OP_XOR = 5

cdef uint64_t ONES = 0xFFFFFFFFFFFFFFFFULL
cdef uint64_t[6] LOWPAT
LOWPAT[0] = 0xAAAAAAAAAAAAAAAAULL
LOWPAT[1] = 0xCCCCCCCCCCCCCCCCULL
LOWPAT[2] = 0xF0F0F0F0F0F0F0F0ULL
LOWPAT[3] = 0xFF00FF00FF00FF00ULL
LOWPAT[4] = 0xFFFF0000FFFF0000ULL
LOWPAT[5] = 0xFFFFFFFF00000000ULL

# LOWCLS[c]: bits j of a word (0 <= j < 64) with popcount(j) == c
cdef uint64_t[7] LOWCLS
cdef int _j
for _j in range(7):
    LOWCLS[_j] = 0
for _j in range(64):
    LOWCLS[__builtin_popcountll(_j)] |= (<uint64_t>1) << _j

cdef extern from *:
    int __builtin_clzll(unsigned long long) nogil


cdef inline void _fill(uint64_t* dst, Py_ssize_t nw, uint64_t v) nogil:
    cdef Py_ssize_t w
    for w in range(nw):
        dst[w] = v


cdef uint64_t* _run(const int[::1] code, Py_ssize_t lo, Py_ssize_t hi, const int* row,
                    const signed char[::1] base, uint64_t* vals, uint64_t** ptr,
                    uint64_t* scratch, uint64_t* ones, uint64_t* zeros, Py_ssize_t nw) nogil:
    """Evaluate one postfix program; operands are pointers, results land in scratch rows."""
    cdef Py_ssize_t i, w, sp = 0
    cdef int op, arg, r
    cdef uint64_t* a
    cdef uint64_t* b
    cdef uint64_t* out
    i = lo
    while i < hi:
        op = code[i]
        arg = code[i + 1]
        if op == OP_VAR:
            r = row[arg]
            if r >= 0:
                ptr[sp] = vals + r * nw
            else:
                ptr[sp] = ones if base[arg] else zeros
            sp += 1
        elif op == OP_CONST:
            ptr[sp] = ones if arg else zeros
            sp += 1
        elif op == OP_NOT:
            a = ptr[sp - 1]
            out = scratch + (sp - 1) * nw
            for w in range(nw):
                out[w] = ~a[w]
            ptr[sp - 1] = out
        else:
            sp -= 1
            b = ptr[sp]
            a = ptr[sp - 1]
            out = scratch + (sp - 1) * nw
            if op == OP_AND:
                for w in range(nw):
                    out[w] = a[w] & b[w]
            elif op == OP_OR:
                for w in range(nw):
                    out[w] = a[w] | b[w]
            else:
                for w in range(nw):
                    out[w] = a[w] ^ b[w]
            ptr[sp - 1] = out
        i += 2
    return ptr[0]


def first_witness(const int[::1] code, const int[::1] starts, const int[::1] ends,
                  const int[::1] phi_code, const signed char[::1] base,
                  const int[::1] x_slots, const signed char[::1] xprimes,
                  const int[::1] r_topo, const int[::1] r_bit):
    cdef Py_ssize_t n = r_topo.shape[0]
    cdef Py_ssize_t nx = x_slots.shape[0]
    cdef Py_ssize_t nslots = base.shape[0]
    cdef Py_ssize_t n_xp = xprimes.shape[0] // nx if nx else 0
    cdef Py_ssize_t lanes = (<Py_ssize_t>1) << n
    cdef Py_ssize_t nw = (lanes + 63) >> 6
    cdef uint64_t tail = ONES if lanes >= 64 else (((<uint64_t>1) << lanes) - 1)
    cdef Py_ssize_t i, j, k, w, slot, depth, maxdepth, lane
    cdef int b, c, pc, hi_pc, best_pc = 1 << 30
    cdef Py_ssize_t best_lane = -1, best_k = -1
    cdef uint64_t frozen, actual, word
    cdef uint64_t* vals
    cdef uint64_t* scratch
    cdef uint64_t** ptr
    cdef uint64_t* consts
    cdef uint64_t* res
    cdef uint64_t* dst
    cdef int* row

    maxdepth = (phi_code.shape[0] // 2) + 1
    for i in range(n):
        slot = r_topo[i]
        depth = (ends[slot] - starts[slot]) // 2 + 1
        if depth > maxdepth:
            maxdepth = depth

    row = <int*>malloc(nslots * sizeof(int))
    vals = <uint64_t*>malloc((nx + n + 1) * nw * sizeof(uint64_t))
    scratch = <uint64_t*>malloc(maxdepth * nw * sizeof(uint64_t))
    ptr = <uint64_t**>malloc(maxdepth * sizeof(uint64_t*))
    consts = <uint64_t*>malloc(2 * nw * sizeof(uint64_t))
    if row == NULL or vals == NULL or scratch == NULL or ptr == NULL or consts == NULL:
        free(row); free(vals); free(scratch); free(ptr); free(consts)
        raise MemoryError()
    try:
        with nogil:
            _fill(consts, nw, 0)
            _fill(consts + nw, nw, ONES)
            for i in range(nslots):
                row[i] = -1
            for j in range(nx):
                row[x_slots[j]] = <int>j
            for i in range(n):
                row[r_topo[i]] = <int>(nx + i)
            for k in range(n_xp):
                for j in range(nx):
                    _fill(vals + j * nw, nw, ONES if xprimes[k * nx + j] else 0)
                for i in range(n):
                    slot = r_topo[i]
                    b = r_bit[i]
                    res = _run(code, starts[slot], ends[slot], row, base, vals, ptr, scratch,
                               consts + nw, consts, nw)
                    dst = vals + (nx + i) * nw
                    actual = ONES if base[slot] else 0
                    for w in range(nw):
                        if b < 6:
                            frozen = LOWPAT[b]
                        elif (w >> (b - 6)) & 1:
                            frozen = ONES
                        else:
                            frozen = 0
                        dst[w] = (frozen & actual) | (res[w] & ~frozen)
                res = _run(phi_code, 0, phi_code.shape[0], row, base, vals, ptr, scratch,
                           consts + nw, consts, nw)
                for w in range(nw):
                    # lane = 64*w + j, so popcount(lane) = popcount(w) + popcount(j)
                    hi_pc = __builtin_popcountll(<unsigned long long>w)
                    if hi_pc > best_pc:
                        continue
                    word = ~res[w]
                    if w == nw - 1:
                        word &= tail
                    if not word:
                        continue
                    for c in range(7):
                        pc = hi_pc + c
                        if pc > best_pc:
                            break
                        if word & LOWCLS[c]:
                            lane = (w << 6) + 63 - __builtin_clzll(word & LOWCLS[c])
                            if pc < best_pc or lane > best_lane:
                                best_pc = pc
                                best_lane = lane
                                best_k = k
                            break
    finally:
        free(row)
        free(vals)
        free(scratch)
        free(ptr)
        free(consts)
    if best_lane < 0:
        return None
    return int(best_lane), int(best_k)
