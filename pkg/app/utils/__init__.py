"""
异常处理工具模块
提供引擎统一的异常层级、HTTP 错误映射装饰器和 CLI 退出码
"""
import asyncio
import functools
import logging
from typing import Callable, Optional
from fastapi import HTTPException

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INPUT_ERROR = 2
EXIT_INVARIANT = 3


class EngineError(Exception):
    """引擎错误基类"""
    exit_code = EXIT_INVARIANT

    def __init__(self, message: str, code: int = 500, detail: Optional[str] = None):
        self.message = message
        self.code = code
        self.detail = detail
        super().__init__(self.message)


class InputError(EngineError):
    """输入错误（语法、未知名称、排序或上下文不匹配）"""
    exit_code = EXIT_INPUT_ERROR

    def __init__(self, message: str = "输入无效", detail: Optional[str] = None):
        super().__init__(message, code=400, detail=detail)


class ValidationError(InputError):
    """语义校验错误"""
    def __init__(self, message: str = "语义校验失败", detail: Optional[str] = None):
        super().__init__(message, detail=detail)


class NotFoundError(InputError):
    """资源未找到错误"""
    def __init__(self, message: str = "资源未找到"):
        super().__init__(message)
        self.code = 404


class PoolTooSmallError(InputError):
    """有限原子池不足以代表模型"""
    def __init__(self, message: str = "原子池过小"):
        super().__init__(message)


class UnsupportedModelError(InputError):
    """模型不满足过程的前置条件"""
    def __init__(self, message: str = "模型不受支持"):
        super().__init__(message)


class InvariantViolation(EngineError):
    """内部不变量被破坏"""
    exit_code = EXIT_INVARIANT

    def __init__(self, message: str = "内部不变量被破坏", detail: Optional[str] = None):
        super().__init__(message, code=500, detail=detail)


def to_http_exception(exc: Exception, where: str) -> HTTPException:
    """引擎错误保留自身状态码；其余异常一律 500，不暴露细节"""
    if isinstance(exc, HTTPException):
        return exc
    if isinstance(exc, EngineError):
        log = logger.warning if exc.code < 500 else logger.error
        log(f"引擎错误 [{where}]: {exc.message}")
        return HTTPException(status_code=exc.code, detail=exc.message)
    if isinstance(exc, RecursionError):
        logger.error(f"递归过深 [{where}]")
        return HTTPException(status_code=500, detail="输入规模超出引擎的递归深度")
    logger.error(f"未处理异常 [{where}]: {type(exc).__name__}: {exc}")
    return HTTPException(status_code=500, detail="服务器内部错误，请稍后重试")


def handle_api_errors(func: Callable) -> Callable:
    """把路由中抛出的异常转换为 HTTPException"""
    if asyncio.iscoroutinefunction(func):
        @functools.wraps(func)
        async def async_wrapper(*args, **kwargs):
            try:
                return await func(*args, **kwargs)
            except Exception as e:
                raise to_http_exception(e, func.__name__)
        return async_wrapper

    @functools.wraps(func)
    def sync_wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except Exception as e:
            raise to_http_exception(e, func.__name__)
    return sync_wrapper
