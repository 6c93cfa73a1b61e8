# 共享工具函数
import os
import json
import math
import logging
import platform
from datetime import datetime
from typing import Optional, Dict, Any


def setup_logging(name: str, level: str = "INFO", log_file: Optional[str] = None):
    """设置日志配置"""
    logger = logging.getLogger(name)
    logger.setLevel(getattr(logging, level.upper()))

    # 重复调用时不叠加处理器
    for handler in list(logger.handlers):
        logger.removeHandler(handler)

    formatter = logging.Formatter(
        '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
    )

    # 控制台处理器 (stderr, stdout留给JSON输出)
    console_handler = logging.StreamHandler()
    console_handler.setFormatter(formatter)
    logger.addHandler(console_handler)

    # 文件处理器
    if log_file:
        directory = os.path.dirname(log_file)
        if directory:
            os.makedirs(directory, exist_ok=True)
        file_handler = logging.FileHandler(log_file, encoding='utf-8')
        file_handler.setFormatter(formatter)
        logger.addHandler(file_handler)

    return logger


def load_json_config(config_path: str, default_config: Dict[str, Any] = None) -> Dict[str, Any]:
    """加载JSON配置文件"""
    try:
        if os.path.exists(config_path):
            with open(config_path, 'r', encoding='utf-8') as f:
                return json.load(f)
        return dict(default_config or {})
    except (OSError, json.JSONDecodeError) as e:
        logging.error(f"加载配置文件失败 {config_path}: {e}")
        return dict(default_config or {})


def format_float(value: float) -> Any:
    """JSON里的浮点数: 有限值原样 (json按最短可回读形式写出), 无穷大写成字符串"""
    if isinstance(value, (bool, int)):
        return value
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    if math.isnan(value):
        return "nan"
    return float(value)


def parse_float(value: Any) -> float:
    """format_float的逆操作"""
    return float(value)


def canonical(obj: Any) -> Any:
    """递归规范化浮点数, 保持键顺序"""
    if isinstance(obj, float):
        return format_float(obj)
    if isinstance(obj, dict):
        return {str(k): canonical(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [canonical(v) for v in obj]
    return obj


def dumps_canonical(obj: Any, indent: Optional[int] = None) -> str:
    """确定性的JSON输出 (相同输入字节一致)"""
    return json.dumps(canonical(obj), indent=indent, ensure_ascii=False, allow_nan=False)


def write_text(path: Optional[str], text: str):
    """写文件; path为None或'-'时写到stdout"""
    if not path or path == '-':
        print(text)
        return
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    with open(path, 'w', encoding='utf-8') as f:
        f.write(text)
        if not text.endswith('\n'):
            f.write('\n')


def format_duration(seconds: float) -> str:
    """格式化耗时"""
    if seconds < 1.0:
        return f"{seconds * 1000:.1f}ms"
    if seconds < 60.0:
        return f"{seconds:.2f}s"
    minutes, rest = divmod(seconds, 60.0)
    return f"{int(minutes)}m{rest:.1f}s"


def get_system_info() -> Dict[str, Any]:
    """获取系统信息"""
    import psutil

    try:
        return {
            "platform": platform.platform(),
            "python_version": platform.python_version(),
            "cpu_count": psutil.cpu_count(),
            "memory_total": psutil.virtual_memory().total,
            "generated_at": datetime.now().strftime("%Y-%m-%d %H:%M:%S"),
        }
    except Exception as e:
        logging.error(f"获取系统信息失败: {e}")
        return {}
