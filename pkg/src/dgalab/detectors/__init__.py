from .base import DetectorModel, KINDS, load_detector, train_detector
from .distances import edit_distance, jaccard_bigrams, kl_divergence
from .features import FEATURE_NAMES, extract_features, features_csv

__all__ = ["DetectorModel", "KINDS", "load_detector", "train_detector",
           "edit_distance", "jaccard_bigrams", "kl_divergence",
           "FEATURE_NAMES", "extract_features", "features_csv"]
