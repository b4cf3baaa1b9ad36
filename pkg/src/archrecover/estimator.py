"""scikit-learn style wrappers around the AIB pipeline.

Both estimators take a nonnegative ``(n_objects, n_attributes)`` weight array
in which NaN marks an absent relation, or an :class:`AttributeMatrix`::

    from sklearn.pipeline import make_pipeline
    pipe = make_pipeline(TfidfWeighting(), AIBClustering(weighting=None))
    labels = pipe.fit_predict(X)
"""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClusterMixin, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted, validate_data

from .aib import (
    AttributeMatrix,
    aib_cluster,
    idf_factors,
    mutual_information,
    normalize,
    select_clustering,
    tfidf,
)


def _check_nonnegative(arr, whom):
    if np.any(arr[~np.isnan(arr)] < 0):
        raise ValueError(f"Negative values in data passed to {whom}")


def _as_matrix(X, object_names=None) -> AttributeMatrix:
    """Validate input and wrap it as an AttributeMatrix.

    Plain arrays get objects named ``"0" .. "n-1"``; if there are more
    attribute columns than objects, the extra ones are named ``"<a{j}>"``.
    """
    if isinstance(X, AttributeMatrix):
        return X
    arr = check_array(X, dtype=float, ensure_all_finite="allow-nan")
    _check_nonnegative(arr, "AIBClustering")
    n, m = arr.shape
    if object_names is None:
        width = len(str(max(n - 1, 0)))
        object_names = [str(i).zfill(width) for i in range(n)]
    objects = tuple(str(o) for o in object_names)
    if len(objects) != n or len(set(objects)) != n:
        raise ValueError("object_names must be unique and match the number of rows")
    # objects double as attributes; extra columns get their own names
    attributes = objects[:m] + tuple(f"<a{j}>" for j in range(n, m))
    if m < n:
        arr = np.hstack([arr, np.full((n, n - m), np.nan)])
        attributes = objects
    return AttributeMatrix(objects, attributes, arr)


class TfidfWeighting(TransformerMixin, BaseEstimator):
    """Reweight attributes by smoothed inverse document frequency.

    ``fit`` learns, per attribute, ``log2(1 + n / df)`` where ``df`` is the
    number of objects holding it; ``transform`` multiplies present weights by
    that factor and leaves absent ones absent.

    Attributes
    ----------
    idf_ : ndarray of shape (n_attributes,)
    n_objects_ : int
    """

    def fit(self, X, y=None):
        arr = validate_data(self, X, dtype=float, ensure_all_finite="allow-nan")
        _check_nonnegative(arr, "TfidfWeighting")
        self.n_objects_ = arr.shape[0]
        self.idf_ = idf_factors(~np.isnan(arr))
        return self

    def transform(self, X):
        check_is_fitted(self, "idf_")
        arr = validate_data(self, X, dtype=float, ensure_all_finite="allow-nan", reset=False)
        _check_nonnegative(arr, "TfidfWeighting")
        # attributes unseen in fit carry no weight
        return arr * np.where(np.isnan(self.idf_), 0.0, self.idf_)

    def __sklearn_tags__(self):
        tags = super().__sklearn_tags__()
        tags.input_tags.allow_nan = True
        tags.input_tags.positive_only = True
        return tags


class AIBClustering(ClusterMixin, BaseEstimator):
    """Agglomerative information bottleneck clustering.

    Parameters
    ----------
    n_clusters : int or None
        Where to cut the merge history. ``None`` picks the cut automatically,
        just before the largest relative jump in information loss.
    weighting : {"tfidf", None}
        Weight transformation applied before normalization.

    Attributes
    ----------
    labels_ : ndarray of shape (n_objects,)
    n_clusters_ : int
    dendrogram_ : Dendrogram
    model_ : ProbModel
    mutual_information_ : float
        I(O;A) of the initial model, in bits; equals the summed merge losses.
    """

    def __init__(self, n_clusters=None, weighting="tfidf"):
        self.n_clusters = n_clusters
        self.weighting = weighting

    def fit(self, X, y=None, object_names=None):
        if self.weighting not in ("tfidf", None):
            raise ValueError(f"unknown weighting {self.weighting!r}")
        matrix = _as_matrix(X, object_names)
        self.n_features_in_ = len(matrix.attributes) if isinstance(X, AttributeMatrix) else np.shape(X)[1]
        if self.weighting == "tfidf":
            matrix = tfidf(matrix)
        self.objects_ = matrix.objects
        self.model_ = normalize(matrix)
        self.mutual_information_ = mutual_information(self.model_)
        self.dendrogram_ = aib_cluster(self.model_)
        self.clustering_ = select_clustering(self.dendrogram_, self.n_clusters)
        self.n_clusters_ = self.clustering_.k
        self.labels_ = np.array([self.clustering_.partition[o] for o in self.objects_])
        return self

    def cut(self, k=None) -> np.ndarray:
        """Labels for another cut of the fitted merge history."""
        check_is_fitted(self, "dendrogram_")
        c = select_clustering(self.dendrogram_, k)
        return np.array([c.partition[o] for o in self.objects_])

    def __sklearn_tags__(self):
        tags = super().__sklearn_tags__()
        tags.input_tags.allow_nan = True
        tags.input_tags.positive_only = True
        return tags
