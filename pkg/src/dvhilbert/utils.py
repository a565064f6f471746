import hashlib
import json
import math
from typing import Any, Iterable, Optional, Tuple

import numpy as np

from .schemas import CommandResponse


def content_key(*parts: Any) -> str:
    """对各部分的 JSON 表示计算 SHA-256 键"""
    payload = json.dumps([str(part) for part in parts], separators=(",", ":"))
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


def geometric_grid(depth: int, start: int = 1) -> np.ndarray:
    """几何网格 r_k = 1 - 2^-k, k = start..depth (双精度下精确)"""
    k = np.arange(start, depth + 1, dtype=float)
    return 1.0 - np.exp2(-k)


def fit_line(x: Iterable[float], y: Iterable[float]) -> Tuple[float, float, float]:
    """Least-squares line through (x, y).

    Returns:
        (slope, intercept, r_squared)
    """
    xs = np.asarray(list(x), dtype=float)
    ys = np.asarray(list(y), dtype=float)
    slope, intercept = np.polyfit(xs, ys, 1)
    residual = ys - (slope * xs + intercept)
    total = float(np.sum((ys - ys.mean()) ** 2))
    r_squared = 1.0 if total == 0.0 else 1.0 - float(np.sum(residual ** 2)) / total
    return float(slope), float(intercept), r_squared


def relative_change(new: float, old: Optional[float]) -> Optional[float]:
    if old is None or not math.isfinite(old) or not math.isfinite(new):
        return None
    scale = max(abs(new), abs(old))
    return 0.0 if scale == 0.0 else abs(new - old) / scale


def format_number(value: Optional[float]) -> str:
    """CSV 输出使用完整双精度"""
    if value is None:
        return ""
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    if math.isnan(value):
        return "nan"
    return f"{value:.17g}"


def format_param(value: float, signed: bool = False) -> str:
    """Shortest text that parses back to the same float, without a trailing .0."""
    text = repr(float(value))
    if text.endswith(".0"):
        text = text[:-2]
    return f"+{text}" if signed and not text.startswith("-") else text


def create_response(data: Any = None, message: str = "success", code: int = 0) -> CommandResponse:
    """构建 CLI 输出的 JSON 响应"""
    return CommandResponse(code=code, message=message, success=code == 0, data=data)
