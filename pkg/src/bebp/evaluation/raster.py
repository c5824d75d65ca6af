"""Decision-boundary rasters for 2-D models."""
from dataclasses import dataclass

import numpy as np

from ..errors import DimensionalityError
from ..victims import decision_value


@dataclass(frozen=True, eq=False)
class Raster:
    xs: np.ndarray
    ys: np.ndarray
    labels: np.ndarray  # (len(ys), len(xs)), row-major over y then x
    values: np.ndarray

    def cells(self):
        for r, y in enumerate(self.ys):
            for c, x in enumerate(self.xs):
                yield x, y, int(self.labels[r, c]), float(self.values[r, c])

    def write_csv(self, path):
        with open(path, "w") as fh:
            fh.write("x,y,label,value\n")
            for x, y, label, value in self.cells():
                fh.write(f"{float(x)!r},{float(y)!r},{label},{value!r}\n")


def padded_bounds(points, pad=0.1):
    P = np.asarray(points, dtype=float)
    lo, hi = P.min(axis=0), P.max(axis=0)
    span = np.where(hi > lo, hi - lo, 1.0)
    return (lo[0] - pad * span[0], hi[0] + pad * span[0], lo[1] - pad * span[1], hi[1] + pad * span[1])


def boundary_raster(model, bounds=(0.0, 1.0, 0.0, 1.0), resolution=200):
    """Label and decision value on a ``resolution`` x ``resolution`` grid.

    ``bounds`` is (xmin, xmax, ymin, ymax); ``resolution`` may be an int or
    an (nx, ny) pair.
    """
    if model.n_features != 2:
        raise DimensionalityError(f"rasters need a 2-D model, this one has {model.n_features} features")
    nx, ny = (resolution, resolution) if np.isscalar(resolution) else resolution
    xs = np.linspace(bounds[0], bounds[1], int(nx))
    ys = np.linspace(bounds[2], bounds[3], int(ny))
    gx, gy = np.meshgrid(xs, ys)
    values = decision_value(model, np.column_stack([gx.ravel(), gy.ravel()])).reshape(gy.shape)
    return Raster(xs, ys, (values > 0).astype(np.int8), values)
