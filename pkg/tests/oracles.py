"""Independent reference computations shared by several test files."""
import sympy


def simplicial_betti(X):
    """Simplicial cohomology Betti numbers from dense sympy coboundaries."""
    by_dim = {}
    for f in X.faces:
        by_dim.setdefault(len(f) - 1, []).append(f)
    ranks = {}
    for k, lower in by_dim.items():
        upper = by_dim.get(k + 1, [])
        if not upper:
            ranks[k] = 0
            continue
        m = sympy.zeros(len(upper), len(lower))
        for i, t in enumerate(upper):
            for j in range(len(t)):
                s = t[:j] + t[j + 1:]
                m[i, lower.index(s)] = (-1) ** j
        ranks[k] = m.rank()
    out = {}
    for k, faces in by_dim.items():
        b = len(faces) - ranks[k] - ranks.get(k - 1, 0)
        if b:
            out[k] = b
    return out
