"""One-dimensional maximization helpers (golden-section search)."""

import math

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0
INV_PHI_SQ = (3.0 - math.sqrt(5.0)) / 2.0


def golden_section_max(f, a, b, tol=1e-8):
    """Golden-section search for the maximum of a unimodal f on [a, b].

    Returns (x_star, f(x_star)) with x_star located to within tol.
    """
    a, b = min(a, b), max(a, b)
    h = b - a
    if h <= tol:
        x = 0.5 * (a + b)
        return x, f(x)

    n = int(math.ceil(math.log(tol / h) / math.log(INV_PHI)))
    c = a + INV_PHI_SQ * h
    d = a + INV_PHI * h
    yc = f(c)
    yd = f(d)
    for _ in range(n - 1):
        if yc > yd:
            b, d, yd = d, c, yc
            h *= INV_PHI
            c = a + INV_PHI_SQ * h
            yc = f(c)
        else:
            a, c, yc = c, d, yd
            h *= INV_PHI
            d = a + INV_PHI * h
            yd = f(d)
    x = c if yc > yd else d
    return x, max(yc, yd)


def bracketed_max(f, lo, hi, coarse=200, tol=1e-8):
    """Coarse scan followed by golden-section refinement.

    Robust against mild multimodality: the scan picks the best coarse cell,
    golden-section then polishes inside it.  Returns (x_star, f_star).
    """
    if hi <= lo:
        raise ValueError("empty bracket")
    xs = [lo + (hi - lo) * k / coarse for k in range(coarse + 1)]
    ys = [f(x) for x in xs]
    k = max(range(len(ys)), key=ys.__getitem__)
    a = xs[max(k - 1, 0)]
    b = xs[min(k + 1, coarse)]
    x, y = golden_section_max(f, a, b, tol)
    if ys[k] > y:
        return xs[k], ys[k]
    return x, y
