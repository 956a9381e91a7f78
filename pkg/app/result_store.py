"""
结果缓存模块

引擎输出只取决于 (操作, 请求负载, 版本)，因此按负载摘要缓存。
开发环境用进程内 LRU，生产环境用 Redis（共享连接池，过期交给 Redis）。
"""
import hashlib
import json
import time
from collections import OrderedDict
from typing import Optional

try:
    import redis
    REDIS_AVAILABLE = True
except ImportError:
    REDIS_AVAILABLE = False

from app.config import (
    MAX_CACHED_RESULTS, REDIS_URL, RESULT_CACHE_TTL, USE_REDIS, is_production, logger
)
from app.version import __version__

REDIS_PREFIX = "orbitmu:result:"


def payload_key(operation: str, payload: dict) -> str:
    """操作名 + 规范 JSON 负载 + 版本号的摘要"""
    canonical = json.dumps(payload, sort_keys=True, ensure_ascii=False)
    digest = hashlib.sha256(f"{__version__}:{operation}:{canonical}".encode("utf-8")).hexdigest()
    return f"{operation}:{digest[:32]}"


class MemoryResultStore:
    """进程内 LRU 缓存，条目带过期时间"""

    def __init__(self, max_entries: int = 500):
        self._entries: OrderedDict[str, tuple[float, dict]] = OrderedDict()
        self._max_entries = max_entries

    def set(self, key: str, result: dict, ttl: int = RESULT_CACHE_TTL):
        self._entries[key] = (time.monotonic() + ttl, result)
        self._entries.move_to_end(key)
        while len(self._entries) > self._max_entries:
            evicted, _ = self._entries.popitem(last=False)
            logger.debug(f"缓存已满，淘汰 {evicted}")

    def get(self, key: str) -> Optional[dict]:
        entry = self._entries.get(key)
        if entry is None:
            return None
        deadline, result = entry
        if time.monotonic() >= deadline:
            del self._entries[key]
            return None
        self._entries.move_to_end(key)
        return result

    def delete(self, key: str):
        self._entries.pop(key, None)

    def cleanup_expired(self) -> int:
        now = time.monotonic()
        stale = [k for k, (deadline, _) in self._entries.items() if now >= deadline]
        for k in stale:
            del self._entries[k]
        if stale:
            logger.info(f"清理了 {len(stale)} 个过期结果")
        return len(stale)

    def __len__(self):
        return len(self._entries)


class RedisResultStore:
    """Redis 缓存；连接池在进程内共享"""

    _pool = None

    def __init__(self, redis_url: str = "redis://localhost:6379/0", max_connections: int = 10):
        if not REDIS_AVAILABLE:
            raise ImportError("redis 库未安装，请运行：pip install redis")
        if RedisResultStore._pool is None:
            RedisResultStore._pool = redis.ConnectionPool.from_url(
                redis_url, max_connections=max_connections, decode_responses=True
            )
        self.redis = redis.Redis(connection_pool=RedisResultStore._pool)
        self.redis.ping()
        logger.info(f"Redis 结果缓存已连接（连接池上限 {max_connections}）")

    def set(self, key: str, result: dict, ttl: int = RESULT_CACHE_TTL):
        self.redis.setex(REDIS_PREFIX + key, ttl, json.dumps(result, sort_keys=True, ensure_ascii=False))

    def get(self, key: str) -> Optional[dict]:
        data = self.redis.get(REDIS_PREFIX + key)
        return json.loads(data) if data else None

    def delete(self, key: str):
        self.redis.delete(REDIS_PREFIX + key)

    def cleanup_expired(self) -> int:
        return 0

    @classmethod
    def close_pool(cls):
        if cls._pool:
            cls._pool.disconnect()
            cls._pool = None
            logger.info("Redis 连接池已关闭")


def create_result_store() -> MemoryResultStore | RedisResultStore:
    """
    USE_REDIS=true 时连接 Redis；连不上时生产环境直接失败，开发环境退回内存缓存
    """
    if USE_REDIS:
        try:
            return RedisResultStore(REDIS_URL)
        except Exception as e:
            logger.error(f"Redis 结果缓存不可用：{e}")
            if is_production:
                raise RuntimeError("生产环境配置使用 Redis 但无法连接") from e
    logger.info("使用内存结果缓存")
    return MemoryResultStore(MAX_CACHED_RESULTS)


result_store = create_result_store()
