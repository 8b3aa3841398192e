# 特征空间模块
from src.featurespace.feature_set import FeatureSet, load_feature_set, save_feature_set
from src.featurespace.geometry import (
    NeighborIndex,
    SimilarityMatrix,
    build_neighbor_index,
    class_centroids,
    cosine_similarity,
    cosine_similarity_matrix,
)
from src.featurespace.agents import sample_ncas
