from fastapi import APIRouter, Request

from app import engine_service as service
from app.bisim import BisimKind
from app.config import RATE_LIMIT, logger
from app.models import (
    ApiResponse, BisimRequest, CheckRequest, FreshPathRequest,
    GameRequest, OrbitsRequest, TranslateRequest
)
from app.rate_limiter import limiter
from app.result_store import payload_key, result_store
from app.utils import handle_api_errors
from app.version import get_version_info

router = APIRouter()


def cached(operation: str, payload: dict, compute) -> tuple[dict, bool]:
    """按负载哈希读取缓存；未命中时计算并写入"""
    key = payload_key(operation, payload)
    hit = result_store.get(key)
    if hit is not None:
        logger.debug(f"缓存命中：{key}")
        return hit, True
    result = compute()
    result_store.set(key, result)
    return result, False


def _model(body) -> object:
    # 服务接口不读取服务器上的文件
    return service.resolve_model(body.model, body.modelText, allow_files=False)


@router.get("/health", response_model=ApiResponse)
def health_check():
    return ApiResponse(data={"status": "healthy", **get_version_info()})

@router.get("/version", response_model=ApiResponse)
def version():
    return ApiResponse(data=get_version_info())

@router.get("/builtins", response_model=ApiResponse)
def list_builtins():
    return ApiResponse(data=service.builtins())

@router.post("/check", response_model=ApiResponse)
@limiter.limit(RATE_LIMIT)
@handle_api_errors
def check(request: Request, body: CheckRequest):
    def compute():
        model = _model(body)
        formula = service.load_formula(body.formula, model, allow_files=False)
        return service.check(model, formula, body.state)

    result, hit = cached("check", body.model_dump(), compute)
    return ApiResponse(message="缓存命中" if hit else "success", data=result)

@router.post("/solve-game", response_model=ApiResponse)
@limiter.limit(RATE_LIMIT)
@handle_api_errors
def solve_game(request: Request, body: GameRequest):
    def compute():
        return service.solve_game(service.resolve_game(body.game, body.gameText, allow_files=False))

    result, hit = cached("solve-game", body.model_dump(), compute)
    return ApiResponse(message="缓存命中" if hit else "success", data=result)

@router.post("/bisim", response_model=ApiResponse)
@limiter.limit(RATE_LIMIT)
@handle_api_errors
def bisim(request: Request, body: BisimRequest):
    def compute():
        return service.bisim(_model(body), body.x, body.y, BisimKind.parse(body.kind, body.k))

    result, hit = cached("bisim", body.model_dump(), compute)
    return ApiResponse(message="缓存命中" if hit else "success", data=result)

@router.post("/freshpath", response_model=ApiResponse)
@limiter.limit(RATE_LIMIT)
@handle_api_errors
def freshpath(request: Request, body: FreshPathRequest):
    def compute():
        return service.freshpath(_model(body), body.state, body.oracle)

    result, hit = cached("freshpath", body.model_dump(), compute)
    return ApiResponse(message="缓存命中" if hit else "success", data=result)

@router.post("/translate-ltl", response_model=ApiResponse)
@limiter.limit(RATE_LIMIT)
@handle_api_errors
def translate_ltl(request: Request, body: TranslateRequest):
    def compute():
        tm = service.resolve_machine(body.machine, body.machineText, allow_files=False)
        return service.translate_ltl(tm, body.infinitePath)

    result, hit = cached("translate-ltl", body.model_dump(), compute)
    return ApiResponse(message="缓存命中" if hit else "success", data=result)

@router.post("/orbits", response_model=ApiResponse)
@limiter.limit(RATE_LIMIT)
@handle_api_errors
def orbits(request: Request, body: OrbitsRequest):
    return ApiResponse(data=service.orbits(_model(body)))
