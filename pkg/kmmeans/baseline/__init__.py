from kmmeans.baseline.complete_case import complete_case
from kmmeans.baseline.hartigan_wong import fit_kmeans_hw, kmeans_hw
from kmmeans.baseline.kpod import KpodConfig, global_mean_fill, kpod

__all__ = ["KpodConfig", "complete_case", "fit_kmeans_hw", "global_mean_fill", "kmeans_hw", "kpod"]
