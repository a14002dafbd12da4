"""Independent reference implementations used by the tests."""
import numpy as np


def dense_laplacian(grid):
    """Explicit matrix of the mirrored-ghost Laplacian, built node by node."""
    n = int(np.prod(grid.shape))
    L = np.zeros((n, n))
    idx = np.arange(n).reshape(grid.shape)
    for node in np.ndindex(*grid.shape):
        row = idx[node]
        for ax, h in enumerate(grid.h):
            for step in (-1, 1):
                nb = list(node)
                nb[ax] += step
                if nb[ax] < 0 or nb[ax] >= grid.shape[ax]:
                    nb[ax] -= 2 * step          # mirror: ghost equals the inner neighbour
                L[row, idx[tuple(nb)]] += 1.0 / h ** 2
            L[row, row] -= 2.0 / h ** 2
    return L


def crossings(phi, grid, axis=0):
    """Linearly interpolated zero crossings along grid lines of one axis.

    Returns a dict mapping (line index, cell index) to the crossing coordinate.
    """
    phi = np.moveaxis(np.asarray(phi, float), axis, -1)
    a, b = phi[..., :-1], phi[..., 1:]
    hit = (a < 0) != (b < 0)
    out = {}
    x0, h = grid.origin[axis], grid.h[axis]
    for idx in zip(*np.nonzero(hit)):
        fa, fb = a[idx], b[idx]
        out[idx] = x0 + h * (idx[-1] + fa / (fa - fb))
    return out


def sampled_distance(points, curve):
    """Unsigned distance from each point to a densely sampled curve or surface."""
    from scipy.spatial import cKDTree
    return cKDTree(curve).query(points)[0]


def ellipse_samples(a, b, n=400000):
    t = np.linspace(0, 2 * np.pi, n, endpoint=False)
    return np.column_stack([a * np.cos(t), b * np.sin(t)])
