"""Pure-Python versions of the hot kernels; semantics match ``_speedups.pyx``."""

OP_REL = 0
OP_EQ = 1
OP_NOT = 2
OP_AND = 3
OP_OR = 4
OP_IMPLIES = 5
OP_EXISTS = 6
OP_FORALL = 7
OP_TRUE = 8
OP_FALSE = 9


def minimal_period(bits):
    """Smallest d dividing len(bits) such that bits is d-periodic (cyclically)."""
    p = len(bits)
    for d in range(1, p + 1):
        if p % d:
            continue
        if all(bits[j] == bits[j % d] for j in range(d, p)):
            return d
    return p


def trim_threshold(prefix, rule):
    """Least N' such that prefix[n] == rule[n % len(rule)] for N' <= n < len(prefix)."""
    p = len(rule)
    n = len(prefix)
    while n > 0 and prefix[n - 1] == rule[(n - 1) % p]:
        n -= 1
    return n


class Program:
    """A formula compiled to parallel node arrays; ``run`` evaluates it."""

    def __init__(self, ops, xs, ys, root):
        self.ops = list(ops)
        self.xs = list(xs)
        self.ys = list(ys)
        self.root = root

    def run(self, rel, size, env):
        """``rel`` is a flat ``size*size`` byte table, ``env`` the variable-slot values."""
        ops, xs, ys = self.ops, self.xs, self.ys
        env = list(env)

        def ev(i):
            op = ops[i]
            if op == OP_REL:
                return rel[env[xs[i]] * size + env[ys[i]]] != 0
            if op == OP_EQ:
                return env[xs[i]] == env[ys[i]]
            if op == OP_NOT:
                return not ev(xs[i])
            if op == OP_AND:
                return ev(xs[i]) and ev(ys[i])
            if op == OP_OR:
                return ev(xs[i]) or ev(ys[i])
            if op == OP_IMPLIES:
                return (not ev(xs[i])) or ev(ys[i])
            if op == OP_EXISTS or op == OP_FORALL:
                slot = xs[i]
                saved = env[slot]
                want = op == OP_EXISTS
                result = not want
                for v in range(size):
                    env[slot] = v
                    if ev(ys[i]) == want:
                        result = want
                        break
                env[slot] = saved
                return result
            return op == OP_TRUE

        return ev(self.root)
