#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
后向兼容表示学习实验主程序入口
"""

from src.core.app import main

if __name__ == "__main__":
    main()
