#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
评估结果的 CSV 读写
"""

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import List, Sequence, Union

from src.eval.retrieval import RetrievalReport
from src.utils.errors import FormatError

RESULTS_HEADER = ["setting", "query_enc", "gallery_enc", "map", "rank1", "cmc1", "cmc5", "cmc10"]
FLOAT_FORMAT = ".9g"


@dataclass(frozen=True)
class ResultRow:
    """results.csv 中的一行"""

    setting: str
    query_enc: str
    gallery_enc: str
    map: float
    rank1: float
    cmc1: float
    cmc5: float
    cmc10: float

    @property
    def is_self_test(self) -> bool:
        return self.query_enc == self.gallery_enc

    @classmethod
    def from_report(cls, setting: str, report: RetrievalReport) -> "ResultRow":
        return cls(
            setting,
            report.query_encoder,
            report.gallery_encoder,
            report.map,
            report.rank1,
            report.cmc_at(1),
            report.cmc_at(5),
            report.cmc_at(10),
        )


def write_results(rows: Sequence[ResultRow], path: Union[str, Path]) -> Path:
    """写出 results.csv"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(RESULTS_HEADER)
        for r in rows:
            writer.writerow(
                [r.setting, r.query_enc, r.gallery_enc]
                + [format(v, FLOAT_FORMAT) for v in (r.map, r.rank1, r.cmc1, r.cmc5, r.cmc10)]
            )
    return path


def read_results(path: Union[str, Path]) -> List[ResultRow]:
    """读取 results.csv"""
    with open(path, "r", encoding="utf-8", newline="") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header != RESULTS_HEADER:
            raise FormatError(f"results 表头不正确: {header}")
        rows = []
        for line in reader:
            if len(line) != len(RESULTS_HEADER):
                raise FormatError(f"results 行字段数不正确: {line}")
            try:
                values = [float(v) for v in line[3:]]
            except ValueError as e:
                raise FormatError(f"results 数值无法解析: {e}") from None
            rows.append(ResultRow(line[0], line[1], line[2], *values))
    return rows
