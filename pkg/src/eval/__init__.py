# 评估模块
from src.eval.retrieval import RetrievalReport, cross_model_matrix, evaluate_retrieval, exact_ap
from src.eval.results import RESULTS_HEADER, ResultRow, read_results, write_results
