"""
Four classifiers
================

k-nearest neighbours, a one-vs-rest SVM trained with SMO, Gaussian naive
Bayes and an entropy decision tree, all on the same PCA features of a
synthetic palm set.  One image of each subject is held out for testing.
"""
import numpy as np

from palmvein import (
    ClassifierSpec,
    FeatureConfig,
    LabeledDataset,
    SynthSpec,
    accuracy,
    build_feature_matrix,
    pca_fit,
    pca_project,
    synth_generate,
)
from palmvein.classifiers import svm_train

data = build_feature_matrix(synth_generate(SynthSpec(noise_std=30.0, seed=5)), cfg=FeatureConfig(size=64))

# every 4th image of each subject goes to the test set
test = np.arange(data.n_samples) % 4 == 0
train_set, test_set = data.subset(np.flatnonzero(~test)), data.subset(np.flatnonzero(test))

# PCA is fitted on the training rows only
model = pca_fit(train_set.X, retain=0.95)
train_z = LabeledDataset(pca_project(model, train_set.X), train_set.y)
test_z = pca_project(model, test_set.X)
print(f"{train_z.n_samples} train / {len(test_z)} test rows, {model.k} PCA features")

for spec in (ClassifierSpec("knn", {"k": 1}), ClassifierSpec("svm"), ClassifierSpec("nb"), ClassifierSpec("dt")):
    fitted = spec.train(train_z.X, train_z.y)
    print(f"{spec.name:>3}: test accuracy {accuracy(spec.predict(fitted, test_z), test_set.y):.3f}")

# the SVM dual solution satisfies the equality constraint sum(a * y) = 0 per machine
svm = svm_train(train_z)
print("SVM machines:", len(svm.machines), "| max |sum a*y|:", max(abs(m.alphas @ m.y) for m in svm.machines))
print("support vectors per machine:", [len(m.support) for m in svm.machines])
