#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
训练轨迹导出模块
"""

import csv
from pathlib import Path
from typing import List, Union

import numpy as np

from src.trainer.config import TrainTrace

TRACE_HEADER = ["epoch", "l_m", "l_tri", "l_id", "l_total", "dgr_active"]
HIST_HEADER = ["bin_lo", "bin_hi", "count"]
GRAD_HEADER = ["epoch", "grad_norm"]
FLOAT_FORMAT = ".9g"


def _fmt(x: float) -> str:
    return format(float(x), FLOAT_FORMAT)


def _write_rows(path: Union[str, Path], header: List[str], rows: List[List[str]]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)
    return path


def write_trace_csv(trace: TrainTrace, path: Union[str, Path]) -> Path:
    """每轮损失均值，表头 epoch,l_m,l_tri,l_id,l_total,dgr_active"""
    rows = [
        [str(e.epoch), _fmt(e.l_m), _fmt(e.l_tri), _fmt(e.l_id), _fmt(e.l_total), str(int(e.dgr_active))]
        for e in trace.epochs
    ]
    return _write_rows(path, TRACE_HEADER, rows)


def write_grad_csv(trace: TrainTrace, path: Union[str, Path]) -> Path:
    """兼容项梯度范数的每轮均值"""
    rows = [[str(e.epoch), _fmt(e.grad_norm)] for e in trace.epochs]
    return _write_rows(path, GRAD_HEADER, rows)


def write_histogram_csv(counts: np.ndarray, edges: np.ndarray, path: Union[str, Path]) -> Path:
    """直方图快照，表头 bin_lo,bin_hi,count"""
    rows = [[_fmt(lo), _fmt(hi), str(int(c))] for lo, hi, c in zip(edges[:-1], edges[1:], counts)]
    return _write_rows(path, HIST_HEADER, rows)


def write_trace_files(trace: TrainTrace, out_dir: Union[str, Path], method: str) -> List[Path]:
    """
    导出一个方法的全部轨迹文件

    trace_<method>.csv、grad_<method>.csv，以及每个快照轮的
    hist_<method>_<epoch>.csv（DGR 生效时另有 hist_<method>_<epoch>_dgr.csv）
    """
    out_dir = Path(out_dir)
    written = [
        write_trace_csv(trace, out_dir / f"trace_{method}.csv"),
        write_grad_csv(trace, out_dir / f"grad_{method}.csv"),
    ]
    for epoch in sorted(trace.histograms):
        written.append(
            write_histogram_csv(trace.histograms[epoch], trace.hist_edges, out_dir / f"hist_{method}_{epoch}.csv")
        )
        if epoch in trace.shifted_histograms:
            written.append(
                write_histogram_csv(
                    trace.shifted_histograms[epoch], trace.hist_edges, out_dir / f"hist_{method}_{epoch}_dgr.csv"
                )
            )
    return written
