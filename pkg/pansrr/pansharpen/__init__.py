from pansrr.pansharpen.awlp import PanDetail, awlp_fuse, infer_levels, inject_proportional, pan_detail_stack

__all__ = ["PanDetail", "awlp_fuse", "infer_levels", "inject_proportional", "pan_detail_stack"]
