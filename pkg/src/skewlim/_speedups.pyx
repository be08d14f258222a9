# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled hot kernels. Keep in sync with _speedups_py.py."""

from libc.stdlib cimport malloc, free

cdef enum:
    OP_REL = 0
    OP_EQ = 1
    OP_NOT = 2
    OP_AND = 3
    OP_OR = 4
    OP_IMPLIES = 5
    OP_EXISTS = 6
    OP_FORALL = 7
    OP_TRUE = 8


def minimal_period(const unsigned char[:] bits):
    cdef Py_ssize_t p = bits.shape[0]
    cdef Py_ssize_t d, j
    cdef bint ok
    for d in range(1, p + 1):
        if p % d:
            continue
        ok = True
        for j in range(d, p):
            if bits[j] != bits[j % d]:
                ok = False
                break
        if ok:
            return d
    return p


def trim_threshold(const unsigned char[:] prefix, const unsigned char[:] rule):
    cdef Py_ssize_t p = rule.shape[0]
    cdef Py_ssize_t n = prefix.shape[0]
    while n > 0 and prefix[n - 1] == rule[(n - 1) % p]:
        n -= 1
    return n


cdef bint _ev(int i, int* ops, int* xs, int* ys, const unsigned char[:] rel,
              int size, int* env) nogil:
    cdef int op = ops[i]
    cdef int slot, saved, v
    cdef bint want, result
    if op == OP_REL:
        return rel[env[xs[i]] * size + env[ys[i]]] != 0
    if op == OP_EQ:
        return env[xs[i]] == env[ys[i]]
    if op == OP_NOT:
        return not _ev(xs[i], ops, xs, ys, rel, size, env)
    if op == OP_AND:
        return _ev(xs[i], ops, xs, ys, rel, size, env) and _ev(ys[i], ops, xs, ys, rel, size, env)
    if op == OP_OR:
        return _ev(xs[i], ops, xs, ys, rel, size, env) or _ev(ys[i], ops, xs, ys, rel, size, env)
    if op == OP_IMPLIES:
        return (not _ev(xs[i], ops, xs, ys, rel, size, env)) or _ev(ys[i], ops, xs, ys, rel, size, env)
    if op == OP_EXISTS or op == OP_FORALL:
        slot = xs[i]
        saved = env[slot]
        want = op == OP_EXISTS
        result = not want
        for v in range(size):
            env[slot] = v
            if _ev(ys[i], ops, xs, ys, rel, size, env) == want:
                result = want
                break
        env[slot] = saved
        return result
    if op == OP_TRUE:
        return True
    return False


cdef class Program:
    """A formula compiled to parallel node arrays; ``run`` evaluates it."""

    cdef int* ops
    cdef int* xs
    cdef int* ys
    cdef int n
    cdef readonly int root

    def __cinit__(self, ops, xs, ys, int root):
        cdef int k
        self.n = len(ops)
        self.root = root
        self.ops = <int*> malloc(max(self.n, 1) * sizeof(int))
        self.xs = <int*> malloc(max(self.n, 1) * sizeof(int))
        self.ys = <int*> malloc(max(self.n, 1) * sizeof(int))
        for k in range(self.n):
            self.ops[k] = ops[k]
            self.xs[k] = xs[k]
            self.ys[k] = ys[k]

    def __dealloc__(self):
        free(self.ops)
        free(self.xs)
        free(self.ys)

    def run(self, const unsigned char[:] rel, int size, env):
        cdef int m = len(env)
        cdef int k
        cdef int buf[64]
        if m > 64:
            raise ValueError("too many variable slots")
        for k in range(m):
            buf[k] = env[k]
        return _ev(self.root, self.ops, self.xs, self.ys, rel, size, buf)
