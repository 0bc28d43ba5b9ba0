from kmmeans.init.kmeanspp import InitConfig, kmeanspp_init, row_distances, seeding_weights

__all__ = ["InitConfig", "kmeanspp_init", "row_distances", "seeding_weights"]
