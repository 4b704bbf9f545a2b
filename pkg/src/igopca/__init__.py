"""PCA of image gradient orientations (IGO-PCA) with an l2 PCA baseline."""

from .baseline import L2Model, L2PCA, l2_fit, l2_reconstruct
from .errors import (
    ConvergenceError,
    DimensionError,
    DomainError,
    IgoError,
    RankError,
    SampleSizeError,
    SymmetryError,
)
from .igo import IGOPCA, IgoModel, batch_reconstruct, fit, reconstruct, remark3_outlier_axis
from .linalg import EigenDecomposition, PrincipalSubspace, gram, hermitian_eig, snapshot_pca
from .orientation import (
    GradientFilterSpec,
    GradientOrientations,
    OrientationImage,
    chord,
    compute_orientation,
    cosine_distance,
    cosine_kernel,
    embed,
    orientation_difference,
    unembed,
)
from .stats import (
    KsResult,
    SpectrumReport,
    dissimilarity_test,
    ks_uniform_test,
    random_orientation_image,
    spectrum_flatness,
)

__version__ = "0.1.0"
