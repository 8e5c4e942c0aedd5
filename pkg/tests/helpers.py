import numpy as np

from framekit.groups import elements_equal


def frames_close(f1, f2, tol=1e-9, elem_tol=1e-8):
    """Atom-by-atom comparison of two frames up to reordering."""
    if f1.size != f2.size:
        return False
    used = [False] * f2.size
    for w, g in f1.atoms:
        for k, (w2, g2) in enumerate(f2.atoms):
            if not used[k] and elements_equal(g, g2, tol=elem_tol) and abs(w - w2) <= tol:
                used[k] = True
                break
        else:
            return False
    return True
