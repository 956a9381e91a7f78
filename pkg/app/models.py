from pydantic import BaseModel, Field
from typing import Optional, Any, Literal

class ApiResponse(BaseModel):
    code: int = 0
    message: str = "success"
    data: Optional[Any] = None

class ModelSource(BaseModel):
    """模型来源：builtin:名称(参数) 或内联模型文本，二选一"""
    model: Optional[str] = None
    modelText: Optional[str] = None

class CheckRequest(ModelSource):
    formula: str
    state: Optional[str] = None

class BisimRequest(ModelSource):
    x: str
    y: str
    kind: Literal["stack", "full"] = "full"
    k: int = Field(default=1, ge=0, le=6)

class FreshPathRequest(ModelSource):
    state: str
    oracle: bool = False

class OrbitsRequest(ModelSource):
    pass

class GameRequest(BaseModel):
    game: Optional[str] = None
    gameText: Optional[str] = None

class TranslateRequest(BaseModel):
    machine: Optional[str] = None
    machineText: Optional[str] = None
    infinitePath: bool = False

class RunConfig(BaseModel):
    """一次命令行运行的配置"""
    command: Literal["check", "solve-game", "bisim", "freshpath", "translate-ltl",
                     "gen-run-model", "orbits", "selftest"]
    model: Optional[str] = None
    formula: Optional[str] = None
    game: Optional[str] = None
    machine: Optional[str] = None
    states: list[str] = []
    format: Literal["text", "json"] = "text"
    seed: int = 0
    k: int = Field(default=1, ge=0)
    kind: Literal["stack", "full"] = "full"
    steps: int = Field(default=16, ge=0)
    infinitePath: bool = False
    oracle: bool = False
    verify: bool = False
    matrix: Optional[str] = None
    includeSlow: bool = False
