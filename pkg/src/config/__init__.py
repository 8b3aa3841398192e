# 配置模块
from src.config.settings import DEFAULT_CONFIG, load_settings, save_settings, validate_settings
