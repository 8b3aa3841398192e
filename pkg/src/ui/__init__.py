# 用户界面模块
from src.ui.report_view import build_report_table, print_report
