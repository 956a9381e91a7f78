"""
OrbitMu HTTP 服务入口

计算接口挂载在 /api/v1（兼容 /api），统一返回 {"code", "message", "data"}。
"""
import os
import time
import traceback

import uvicorn
from fastapi import FastAPI, HTTPException, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from slowapi import _rate_limit_exceeded_handler
from slowapi.errors import RateLimitExceeded
from starlette.middleware.base import BaseHTTPMiddleware

from app.config import ALLOWED_ORIGINS, is_production, logger
from app.rate_limiter import check_request_body_size, limiter
from app.result_store import RedisResultStore
from app.routes import router
from app.utils import EngineError
from app.version import __version__

API_VERSION = "v1"
GUARDED_METHODS = ("POST", "PUT", "PATCH")


def _envelope(status: int, message: str) -> JSONResponse:
    return JSONResponse(status_code=status, content={"code": status, "message": message, "data": None})


class ApiGuardMiddleware(BaseHTTPMiddleware):
    """
    计算接口的守卫：拒绝超大的模型文本，记录引擎耗时，附加安全响应头
    """
    async def dispatch(self, request: Request, call_next):
        if request.method in GUARDED_METHODS:
            length = request.headers.get("content-length", "")
            if length.isdigit():
                ok, reason = check_request_body_size(int(length))
                if not ok:
                    logger.warning(f"拒绝请求 {request.url.path}：{reason}")
                    return _envelope(413, reason)

        started = time.perf_counter()
        response = await call_next(request)
        elapsed = time.perf_counter() - started

        if request.method in GUARDED_METHODS:
            response.headers["X-Compute-Time"] = f"{elapsed:.3f}"
            logger.info(f"{request.method} {request.url.path} -> {response.status_code}（{elapsed:.3f}s）")
        response.headers["X-Content-Type-Options"] = "nosniff"
        response.headers["X-Frame-Options"] = "DENY"
        if request.url.scheme == "https":
            response.headers["Strict-Transport-Security"] = "max-age=31536000; includeSubDomains"
        if request.url.path.startswith("/api/"):
            # 结果由服务端缓存，浏览器不缓存
            response.headers["Cache-Control"] = "no-store"
        return response


app = FastAPI(
    title="OrbitMu API",
    version=__version__,
    description="轨道有限集合上的原子 μ-演算：模型检测、奇偶博弈、k-互模拟与 #Path 判定",
)
app.state.limiter = limiter
app.state.api_version = API_VERSION
app.add_exception_handler(RateLimitExceeded, _rate_limit_exceeded_handler)


@app.exception_handler(HTTPException)
async def http_error(request: Request, exc: HTTPException):
    logger.warning(f"HTTP {exc.status_code} {request.url.path}: {exc.detail}")
    return _envelope(exc.status_code, str(exc.detail))


@app.exception_handler(RequestValidationError)
async def request_validation_error(request: Request, exc: RequestValidationError):
    first = exc.errors()[0] if exc.errors() else {}
    where = ".".join(str(part) for part in first.get("loc", ()))
    return _envelope(422, f"请求参数无效：{where} {first.get('msg', '')}".strip())


@app.exception_handler(EngineError)
async def engine_error(request: Request, exc: EngineError):
    """路由之外抛出的引擎错误（例如依赖项中）"""
    logger.warning(f"引擎错误 {request.url.path}: {exc.message}")
    return _envelope(exc.code, exc.message)


@app.exception_handler(Exception)
async def unexpected_error(request: Request, exc: Exception):
    error_id = id(exc)
    logger.error(f"未处理异常 [{error_id}] {request.url.path}: {type(exc).__name__}: {exc}")
    logger.debug(f"异常堆栈 [{error_id}]:\n{traceback.format_exc()}")
    message = "服务器内部错误，请稍后重试" if is_production else f"{type(exc).__name__}: {exc}"
    return _envelope(500, message)


app.add_middleware(
    CORSMiddleware,
    allow_origins=ALLOWED_ORIGINS,
    allow_credentials=False,
    allow_methods=["GET", "POST", "OPTIONS"],
    allow_headers=["Content-Type"],
)
app.add_middleware(ApiGuardMiddleware)

app.include_router(router, prefix=f"/api/{API_VERSION}")
app.include_router(router, prefix="/api")


@app.on_event("shutdown")
def release_result_store():
    RedisResultStore.close_pool()
    logger.info("OrbitMu 服务已停止")


if __name__ == "__main__":
    port = int(os.getenv("PORT", "13131"))
    host = os.getenv("HOST", "127.0.0.1")
    uvicorn.run(app, host=host, port=port)
