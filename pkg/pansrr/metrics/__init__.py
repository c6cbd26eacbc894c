from pansrr.metrics.quality import (
    mse,
    psnr,
    read_metrics_csv,
    render_table,
    ssim,
    volume_report,
    write_metrics_csv,
)

__all__ = [
    "mse",
    "psnr",
    "read_metrics_csv",
    "render_table",
    "ssim",
    "volume_report",
    "write_metrics_csv",
]
