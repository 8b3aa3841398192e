#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
应用程序核心模块
"""

import sys
from typing import List, Optional

from src.core.command_handler import CommandHandler


def main(argv: Optional[List[str]] = None) -> None:
    """应用程序入口点"""
    sys.exit(CommandHandler().handle(argv))


if __name__ == "__main__":
    main()
