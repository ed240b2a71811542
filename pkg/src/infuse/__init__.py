"""INFUSE: information-fusing stacking ensemble for network intrusion detection.

The package trains five heterogeneous base classifiers over NSL-KDD style
traffic features, enriches the feature space with two deep weight-regularized
autoencoders, and fuses decision scores, raw features, and latent codes into
a hybrid vector classified by a deep meta-learner.
"""

__version__ = "0.1.0"
