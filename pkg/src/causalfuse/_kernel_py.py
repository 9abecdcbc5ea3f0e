"""Pure-Python witness search.

Every subset W of the relevant variables is one "lane"; all 2**n lanes are
evaluated at once by packing them into the bits of a Python int.  Lane
``m`` freezes the variable at bit position ``b`` iff bit ``b`` of ``m`` is
set.  The caller assigns bit positions in reverse name order, which makes
the lexicographically smallest subset of a given size the numerically
largest lane of that popcount.
"""
from functools import lru_cache

OP_VAR, OP_CONST, OP_NOT, OP_AND, OP_OR, OP_XOR = range(6)


@lru_cache(maxsize=64)
def lane_patterns(n):
    """``pats[b]`` has bit ``m`` set iff lane ``m`` includes bit ``b``."""
    lanes = 1 << n
    full = (1 << lanes) - 1
    pats = []
    for b in range(n):
        half = 1 << b
        period = half << 1
        block = ((1 << half) - 1) << half
        pats.append(block * (full // ((1 << period) - 1)))
    return tuple(pats)


@lru_cache(maxsize=64)
def popcount_classes(n):
    """``cls[k]`` has bit ``m`` set iff ``popcount(m) == k``."""
    cls = [1]
    for i in range(n):
        shift = 1 << i
        nxt = [0] * (i + 2)
        for k, c in enumerate(cls):
            nxt[k] |= c
            nxt[k + 1] |= c << shift
        cls = nxt
    return tuple(cls)


def _run(code, lo, hi, vals, full):
    stack = []
    push = stack.append
    for i in range(lo, hi, 2):
        op = code[i]
        if op == OP_VAR:
            push(vals[code[i + 1]])
        elif op == OP_CONST:
            push(full if code[i + 1] else 0)
        elif op == OP_NOT:
            push(stack.pop() ^ full)
        else:
            b = stack.pop()
            a = stack.pop()
            if op == OP_AND:
                push(a & b)
            elif op == OP_OR:
                push(a | b)
            else:
                push(a ^ b)
    return stack[-1]


def first_witness(code, starts, ends, phi_code, base, x_slots, xprimes, r_topo, r_bit):
    """Search every (W, x') pair for one that falsifies the effect.

    Returns ``(mask, k)`` for the first witness in (|W|, name order) with
    settings ``xprimes[k]`` tried in order, or ``None`` when none exists.
    """
    n = len(r_topo)
    lanes = 1 << n
    full = (1 << lanes) - 1
    pats = lane_patterns(n)
    nx = len(x_slots)
    n_xp = len(xprimes) // nx if nx else 0
    falsified = []
    for k in range(n_xp):
        vals = [full if b else 0 for b in base]
        for j in range(nx):
            vals[x_slots[j]] = full if xprimes[k * nx + j] else 0
        for slot, bit in zip(r_topo, r_bit):
            computed = _run(code, starts[slot], ends[slot], vals, full)
            frozen = pats[bit]
            actual = full if base[slot] else 0
            vals[slot] = (frozen & actual) | (computed & ~frozen & full)
        phi = _run(phi_code, 0, len(phi_code), vals, full)
        falsified.append(phi ^ full)
    if not any(falsified):
        return None
    for cls in popcount_classes(n):
        best, best_k = -1, -1
        for k, lanes_k in enumerate(falsified):
            hit = lanes_k & cls
            if hit:
                m = hit.bit_length() - 1
                if m > best:
                    best, best_k = m, k
        if best >= 0:
            return best, best_k
    return None
