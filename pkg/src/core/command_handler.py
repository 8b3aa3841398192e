#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
命令处理模块
负责解析命令行参数并执行 gen-data / run / report 子命令
"""

import argparse
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional

from rich.console import Console

from src.config.settings import load_settings
from src.core.experiment import ExperimentRunner, with_overrides
from src.eval.results import read_results
from src.ui.report_view import print_report
from src.utils.errors import ConfigError, FormatError, RBCLError
from src.utils.logger import setup_logger

logger = setup_logger(__name__)
err_console = Console(stderr=True)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3


def build_parser() -> argparse.ArgumentParser:
    """构建命令行解析器"""
    parser = argparse.ArgumentParser(prog="rbcl", description="基于排序的后向兼容表示学习实验工具")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", required=True, help="实验配置文件 (JSON)")
        p.add_argument("--seed", type=int, default=None, help="覆盖 train.seed")
        p.add_argument("--out", default=None, help="覆盖输出目录")

    add_common(sub.add_parser("gen-data", help="生成合成数据集并写出CSV"))
    add_common(sub.add_parser("run", help="运行完整实验"))
    report = sub.add_parser("report", help="打印结果表格")
    report.add_argument("--out", required=True, help="结果目录")
    return parser


class CommandHandler:
    """命令处理器类"""

    def __init__(self):
        # 注册命令
        self.commands: Dict[str, Callable[[argparse.Namespace], Dict[str, Any]]] = {
            "gen-data": self.cmd_gen_data,
            "run": self.cmd_run,
            "report": self.cmd_report,
        }

    def handle(self, argv: Optional[List[str]] = None) -> int:
        """
        处理命令行

        参数:
            argv: 参数列表，默认取 sys.argv[1:]

        返回:
            退出码：0 成功，2 配置错误，3 运行时错误
        """
        try:
            args = build_parser().parse_args(argv)
        except SystemExit as e:
            return EXIT_OK if e.code in (0, None) else EXIT_CONFIG

        result = self.commands[args.command](args)
        if result.get("success"):
            return EXIT_OK
        err_console.print(f"[bold red]错误: {result.get('error')}[/bold red]")
        return result.get("exit_code", EXIT_RUNTIME)

    def _guarded(self, action: Callable[[], Dict[str, Any]]) -> Dict[str, Any]:
        """把异常转换为结果字典"""
        try:
            return action()
        except ConfigError as e:
            logger.error(f"配置错误: {e}")
            return {"success": False, "error": str(e), "exit_code": EXIT_CONFIG}
        except (RBCLError, OSError, ValueError) as e:
            logger.error(f"运行失败: {e}")
            return {"success": False, "error": str(e), "exit_code": EXIT_RUNTIME}
        except Exception as e:
            logger.exception(f"未预期的错误: {e}")
            return {"success": False, "error": str(e), "exit_code": EXIT_RUNTIME}

    def _runner(self, args: argparse.Namespace) -> ExperimentRunner:
        config = with_overrides(load_settings(args.config), seed=args.seed, out=args.out)
        return ExperimentRunner(config)

    def cmd_gen_data(self, args: argparse.Namespace) -> Dict[str, Any]:
        """生成合成数据集"""
        def action():
            files = self._runner(args).gen_data()
            return {"success": True, "files": files}
        return self._guarded(action)

    def cmd_run(self, args: argparse.Namespace) -> Dict[str, Any]:
        """运行实验"""
        def action():
            outcome = self._runner(args).run()
            return {"success": True, "files": outcome.files, "rows": outcome.rows}
        return self._guarded(action)

    def cmd_report(self, args: argparse.Namespace) -> Dict[str, Any]:
        """打印结果表格"""
        path = Path(args.out) / "results.csv"
        if not path.is_file():
            return {"success": False, "error": f"结果文件不存在: {path}", "exit_code": EXIT_CONFIG}
        try:
            rows = read_results(path)
        except FormatError as e:
            return {"success": False, "error": str(e), "exit_code": EXIT_CONFIG}
        print_report(rows)
        return {"success": True, "rows": rows}


def run_experiment(config_path: str, seed: Optional[int] = None, out: Optional[str] = None) -> int:
    """运行实验并返回退出码"""
    argv = ["run", "--config", str(config_path)]
    if seed is not None:
        argv += ["--seed", str(seed)]
    if out is not None:
        argv += ["--out", str(out)]
    return CommandHandler().handle(argv)


def emit_report(results_dir: str) -> int:
    """打印结果表格并返回退出码"""
    return CommandHandler().handle(["report", "--out", str(results_dir)])
