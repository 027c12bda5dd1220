"""Pure-Python kernel: unit propagation, complete DPLL search and
stuck-at-opposite circuit simulation over flat int arrays.

Mirrors the compiled extension in ``_kernel.pyx``; selected at import time
by ``activetest.kernel`` when the extension is unavailable.

Conventions: variables are 1-based; ``assign``/``values`` are int8 arrays
of length n_vars + 1 with -1 = unassigned, 0 = false, 1 = true. Clause
literals are signed variable ids.
"""

from __future__ import annotations


def propagate(lits, offsets, assign) -> int:
    """Unit propagation to fixpoint, in place. Returns 0 on conflict."""
    return _propagate_trail(lits, offsets, assign, [])


def _propagate_trail(lits, offsets, assign, trail) -> int:
    n_clauses = len(offsets) - 1
    changed = True
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
            trail.append(v)
            changed = True
    return 1


def solve(lits, offsets, assign) -> int:
    """Complete satisfiability search, in place.

    Chronological backtracking over unassigned variables in ascending id
    order, false branch first, with unit propagation at every node. On
    success ``assign`` holds a model.
    """
    trail: list[int] = []
    if not _propagate_trail(lits, offsets, assign, trail):
        return 0
    n = len(assign) - 1
    stack: list[list[int]] = []  # [var, phase_tried, trail_mark]
    while True:
        v = 0
        for i in range(1, n + 1):
            if assign[i] < 0:
                v = i
                break
        if v == 0:
            return 1
        stack.append([v, 0, len(trail)])
        assign[v] = 0
        trail.append(v)
        while not _propagate_trail(lits, offsets, assign, trail):
            flipped = False
            while stack and not flipped:
                var, phase, mark = stack.pop()
                while len(trail) > mark:
                    assign[trail.pop()] = -1
                if phase == 0:
                    stack.append([var, 1, mark])
                    assign[var] = 1
                    trail.append(var)
                    flipped = True
            if not flipped:
                return 0


def simulate(kinds, fanin_offsets, fanins, out_vid, topo, values, fault) -> None:
    """Topological gate evaluation; gates with fault[g] == 1 emit the
    negation of their nominal function. Input net values must be set."""
    for t in topo:
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
