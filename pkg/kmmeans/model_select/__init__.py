from kmmeans.model_select.jump_statistic import distortion, jump_statistic, select_k

__all__ = ["distortion", "jump_statistic", "select_k"]
