# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernel: unit propagation, complete DPLL search and
stuck-at-opposite circuit simulation. See ``_kernel_py`` for the
reference implementation and the array conventions."""

from libc.stdlib cimport free, malloc


def propagate(int[::1] lits, int[::1] offsets, signed char[::1] assign) -> int:
    cdef int* trail = <int*> malloc(assign.shape[0] * sizeof(int))
    if trail == NULL:
        raise MemoryError()
    cdef int trail_len = 0
    cdef int ok
    try:
        ok = _propagate(lits, offsets, assign, trail, &trail_len)
    finally:
        free(trail)
    return ok


cdef int _propagate(int[::1] lits, int[::1] offsets, signed char[::1] assign,
                    int* trail, int* trail_len) noexcept:
    cdef int n_clauses = offsets.shape[0] - 1
    cdef bint changed = True
    cdef int ci, k, start, end, lit, v, n_free, unit_lit
    cdef signed char val
    cdef bint satisfied
    while changed:
        changed = False
        for ci in range(n_clauses):
            start = offsets[ci]
            end = offsets[ci + 1]
            unit_lit = 0
            n_free = 0
            satisfied = False
            for k in range(start, end):
                lit = lits[k]
                v = lit if lit > 0 else -lit
                val = assign[v]
                if val < 0:
                    n_free += 1
                    if n_free > 1:
                        break
                    unit_lit = lit
                elif (val == 1) == (lit > 0):
                    satisfied = True
                    break
            if satisfied or n_free > 1:
                continue
            if n_free == 0:
                return 0
            v = unit_lit if unit_lit > 0 else -unit_lit
            assign[v] = 1 if unit_lit > 0 else 0
            trail[trail_len[0]] = v
            trail_len[0] += 1
            changed = True
    return 1


def solve(int[::1] lits, int[::1] offsets, signed char[::1] assign) -> int:
    cdef int n = assign.shape[0] - 1
    cdef int* trail = <int*> malloc((n + 1) * sizeof(int))
    # decision stack: var, phase tried, trail mark
    cdef int* dvar = <int*> malloc((n + 1) * sizeof(int))
    cdef int* dphase = <int*> malloc((n + 1) * sizeof(int))
    cdef int* dmark = <int*> malloc((n + 1) * sizeof(int))
    if trail == NULL or dvar == NULL or dphase == NULL or dmark == NULL:
        free(trail); free(dvar); free(dphase); free(dmark)
        raise MemoryError()
    cdef int trail_len = 0, depth = 0
    cdef int v, i, var, phase, mark
    cdef bint flipped
    cdef int result = -1
    try:
        if not _propagate(lits, offsets, assign, trail, &trail_len):
            return 0
        while result < 0:
            v = 0
            for i in range(1, n + 1):
                if assign[i] < 0:
                    v = i
                    break
            if v == 0:
                result = 1
                break
            dvar[depth] = v
            dphase[depth] = 0
            dmark[depth] = trail_len
            depth += 1
            assign[v] = 0
            trail[trail_len] = v
            trail_len += 1
            while not _propagate(lits, offsets, assign, trail, &trail_len):
                flipped = False
                while depth > 0 and not flipped:
                    depth -= 1
                    var = dvar[depth]
                    phase = dphase[depth]
                    mark = dmark[depth]
                    while trail_len > mark:
                        trail_len -= 1
                        assign[trail[trail_len]] = -1
                    if phase == 0:
                        dvar[depth] = var
                        dphase[depth] = 1
                        dmark[depth] = mark
                        depth += 1
                        assign[var] = 1
                        trail[trail_len] = var
                        trail_len += 1
                        flipped = True
                if not flipped:
                    result = 0
                    break
    finally:
        free(trail); free(dvar); free(dphase); free(dmark)
    return result


def simulate(int[::1] kinds, int[::1] fanin_offsets, int[::1] fanins,
             int[::1] out_vid, int[::1] topo,
             signed char[::1] values, unsigned char[::1] fault) -> None:
    cdef int ti, t, k, s, e, j
    cdef signed char val
    for ti in range(topo.shape[0]):
        t = topo[ti]
        k = kinds[t]
        s = fanin_offsets[t]
        e = fanin_offsets[t + 1]
        if k == 0 or k == 1:  # AND / NAND
            val = 1
            for j in range(s, e):
                if values[fanins[j]] == 0:
                    val = 0
                    break
            if k == 1:
                val ^= 1
        elif k == 2 or k == 3:  # OR / NOR
            val = 0
            for j in range(s, e):
                if values[fanins[j]] == 1:
                    val = 1
                    break
            if k == 3:
                val ^= 1
        elif k == 4:  # NOT
            val = values[fanins[s]] ^ 1
        elif k == 5:  # BUF
            val = values[fanins[s]]
        else:  # XOR / XNOR
            val = 0
            for j in range(s, e):
                val ^= values[fanins[j]]
            if k == 7:
                val ^= 1
        if fault[t]:
            val ^= 1
        values[out_vid[t]] = val
