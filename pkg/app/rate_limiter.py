"""
速率限制与请求体大小检查
"""
from typing import Tuple

from slowapi import Limiter
from slowapi.util import get_remote_address

from app.config import MAX_REQUEST_BODY_SIZE

# 注意：设置 config_filename="" 禁用自动读取 .env 文件
# 配置已经通过 load_dotenv(encoding='utf-8') 加载
limiter = Limiter(key_func=get_remote_address, config_filename="")


def check_request_body_size(content_length: int) -> Tuple[bool, str]:
    """
    检查请求体大小是否超过限制

    Args:
        content_length: 请求体大小（字节）

    Returns:
        (is_valid, error_message): 是否有效，错误消息
    """
    if content_length > MAX_REQUEST_BODY_SIZE:
        size_kb = content_length / 1024
        max_kb = MAX_REQUEST_BODY_SIZE / 1024
        return False, f"请求体过大（{size_kb:.1f}KB），最大支持 {max_kb:.0f}KB"

    return True, ""
