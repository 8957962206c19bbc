"""
PCA on wavelet features
=======================

With 120 images and 16384 coefficients per image the covariance matrix
would be 16384 x 16384.  The fit instead diagonalizes the 120 x 120 Gram
matrix (same nonzero eigenvalues) with a cyclic Jacobi eigen-solver and
maps the eigenvectors back to feature space.
"""
import numpy as np

from palmvein import FeatureConfig, SynthSpec, build_feature_matrix, pca_fit, pca_project, pca_reconstruct, synth_generate

data = build_feature_matrix(synth_generate(SynthSpec()), cfg=FeatureConfig(size=128))
print("feature matrix", data.X.shape)

# keep the fewest components reaching 95% of the variance
model = pca_fit(data.X, retain=0.95)
print(f"components kept: {model.k} of at most {data.n_samples - 1}")
print("cumulative explained fraction (first 5):", np.round(model.explained_fraction[:5], 3))

Z = pca_project(model, data.X)
print("projected", Z.shape)

# components are orthonormal; projections are uncorrelated with the eigenvalues as variances
print("max |C C^T - I|", np.abs(model.components @ model.components.T - np.eye(model.k)).max())
print("projection variances match eigenvalues:", np.allclose(Z.var(axis=0, ddof=1), model.eigenvalues))

# reconstruction error shrinks as components are added
for k in (1, 5, 20, model.k):
    m = pca_fit(data.X, retain=k)
    err = np.linalg.norm(pca_reconstruct(m, pca_project(m, data.X)) - data.X) / np.linalg.norm(data.X - m.mean)
    print(f"k={k:3d}: relative reconstruction error {err:.4f}")

# the Gram and covariance routes give the same spectrum on a small problem
small = data.X[:20, :12]
a = pca_fit(small, retain=10, method="gram")
b = pca_fit(small, retain=10, method="covariance")
print("gram vs covariance eigenvalues agree:", np.allclose(a.eigenvalues, b.eigenvalues))
