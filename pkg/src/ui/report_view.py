#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
结果报告视图
按查询编码器汇总交叉评估与自测评估
"""

from typing import Dict, List, Optional, Sequence

from rich.console import Console
from rich.table import Table

from src.eval.results import ResultRow

MISSING = "-"


def _fmt(value: Optional[float]) -> str:
    return MISSING if value is None else f"{value:.4f}"


def build_report_table(rows: Sequence[ResultRow], old_tag: str = "old") -> Table:
    """
    构建报告表格：每个方法一行，列为交叉评估与自测的 mAP / Rank-1
    旧模型自测不单独成行，写在表格说明中

    参数:
        rows: results.csv 中的行
        old_tag: 旧编码器标签（交叉评估的图库编码器）

    返回:
        rich 表格
    """
    order: List[str] = []
    cross: Dict[str, ResultRow] = {}
    self_test: Dict[str, ResultRow] = {}
    for row in rows:
        if row.query_enc != old_tag and row.query_enc not in order:
            order.append(row.query_enc)
        if row.is_self_test:
            self_test[row.query_enc] = row
        elif row.gallery_enc == old_tag:
            cross[row.query_enc] = row

    settings = sorted({row.setting for row in rows})
    direct = self_test.get(old_tag)
    caption = None
    if direct is not None:
        caption = f"{old_tag}→{old_tag}: mAP {_fmt(direct.map)}, Rank-1 {_fmt(direct.rank1)}"
    table = Table(title=f"兼容性评估 ({', '.join(settings)})", caption=caption)
    table.add_column("方法", style="cyan")
    table.add_column(f"mAP (新→{old_tag})", justify="right")
    table.add_column(f"Rank-1 (新→{old_tag})", justify="right")
    table.add_column("mAP (自测)", justify="right")
    table.add_column("Rank-1 (自测)", justify="right")

    for encoder in order:
        c = cross.get(encoder)
        s = self_test.get(encoder)
        table.add_row(
            encoder,
            _fmt(c.map if c else None),
            _fmt(c.rank1 if c else None),
            _fmt(s.map if s else None),
            _fmt(s.rank1 if s else None),
        )
    return table


def print_report(rows: Sequence[ResultRow], console: Optional[Console] = None) -> None:
    """把报告表格打印到标准输出"""
    console = console or Console()
    console.print(build_report_table(rows))
