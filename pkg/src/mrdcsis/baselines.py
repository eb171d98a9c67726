"""Reference screeners: Pearson SIS and raw-data distance correlation (DC-SIS)."""

from __future__ import annotations

import math

import numpy as np

from .dcor import dcor_sq_from_terms, dcov_terms, dcov_terms_against, distance_summary
from .errors import CapabilityError, DegenerateInputError, ShapeError
from .mrank import as_cloud


def _univariate(v, name: str) -> np.ndarray:
    arr = as_cloud(v)
    if arr.shape[1] != 1:
        raise CapabilityError(
            f"SIS needs a univariate {name}; got dimension {arr.shape[1]}"
        )
    return arr[:, 0]


def sis_score(x, y) -> float:
    """Absolute Pearson correlation between two univariate samples."""
    xv = _univariate(x, "predictor")
    yv = _univariate(y, "response")
    if xv.shape[0] != yv.shape[0]:
        raise ShapeError(f"sample sizes differ: {xv.shape[0]} vs {yv.shape[0]}")
    xc = xv - xv.mean()
    yc = yv - yv.mean()
    sxx = float(np.dot(xc, xc))
    syy = float(np.dot(yc, yc))
    if not (sxx > 0.0 and syy > 0.0):
        raise DegenerateInputError("zero variance in SIS input")
    return min(abs(float(np.dot(xc, yc))) / math.sqrt(sxx * syy), 1.0)


def dcsis_score(x, y, backend: str | None = None) -> float:
    """Squared distance correlation of the raw (unranked) clouds."""
    return dcor_sq_from_terms(dcov_terms(x, y, backend=backend))


class SisScorer:
    name = "sis"

    def __init__(self, response, backend=None, table=None):
        self.y = _univariate(response, "response")
        yc = self.y - self.y.mean()
        if not float(np.dot(yc, yc)) > 0.0:
            raise DegenerateInputError("response has zero variance")

    @staticmethod
    def check_predictors(d: int) -> None:
        if d != 1:
            raise CapabilityError(f"SIS needs univariate predictors; got dimension {d}")

    def score(self, xj) -> float:
        return sis_score(xj, self.y)


class DcsisScorer:
    name = "dcsis"

    def __init__(self, response, backend=None, table=None):
        self.summary = distance_summary(response, backend=backend)
        if not self.summary.dvar > 0.0:
            raise DegenerateInputError("response has zero distance variance")

    @staticmethod
    def check_predictors(d: int) -> None:
        pass

    def score(self, xj) -> float:
        return dcor_sq_from_terms(dcov_terms_against(xj, self.summary))
