import os
import logging
from pathlib import Path
from dotenv import load_dotenv

# 加载 .env 文件（指定 UTF-8 编码以支持中文注释）
load_dotenv(encoding='utf-8')

# 基础路径配置
BASE_DIR = Path(__file__).resolve().parent.parent
FIXTURES_DIR = BASE_DIR / 'app' / 'fixtures'

# 日志配置
LOG_LEVEL = os.getenv('LOG_LEVEL', 'INFO').upper()
logging.basicConfig(
    level=getattr(logging, LOG_LEVEL, logging.INFO),
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
)
logger = logging.getLogger(__name__)

# 引擎配置
MAX_FIXPOINT_ROUNDS = int(os.getenv('ORBITMU_MAX_FIXPOINT_ROUNDS', '10000'))  # Kleene 迭代硬上限
MAX_GAME_NODES = int(os.getenv('ORBITMU_MAX_GAME_NODES', '400000'))  # 显式博弈构造的轨道预算
ORACLE_EXTRA = int(os.getenv('ORBITMU_ORACLE_EXTRA', '3'))  # 暴力求值默认新鲜原子数
BOUNDED_ORACLE_STEPS = int(os.getenv('ORBITMU_BOUNDED_ORACLE_STEPS', '40'))

# 自检配置
SELFTEST_SEED = int(os.getenv('ORBITMU_SELFTEST_SEED', '0'))
SELFTEST_MATRIX = os.path.normpath(os.getenv('ORBITMU_SELFTEST_MATRIX', str(FIXTURES_DIR / 'matrix.yaml')))

# 服务配置
is_production = os.getenv('PRODUCTION', 'false').lower() == 'true'

if is_production:
    # 生产环境：严格限制来源
    CORS_ORIGINS_STR = os.getenv('CORS_ORIGINS', '')
    if not CORS_ORIGINS_STR:
        logger.error("⚠️ 生产环境必须配置 CORS_ORIGINS 环境变量！")
        raise ValueError("生产环境必须配置 CORS_ORIGINS 环境变量")
    logger.info(f"生产环境 CORS 配置：{CORS_ORIGINS_STR}")
else:
    CORS_ORIGINS_STR = os.getenv('CORS_ORIGINS', 'http://localhost:13131,http://127.0.0.1:13131')

ALLOWED_ORIGINS = [origin.strip() for origin in CORS_ORIGINS_STR.split(',') if origin.strip()]

RATE_LIMIT = os.getenv('RATE_LIMIT', '30/minute')
MAX_REQUEST_BODY_SIZE = int(os.getenv('MAX_REQUEST_BODY_SIZE', str(256 * 1024)))  # 默认 256KB

# 结果缓存配置
USE_REDIS = os.getenv('USE_REDIS', 'false').lower() == 'true'
REDIS_URL = os.getenv('REDIS_URL', 'redis://localhost:6379/0')
RESULT_CACHE_TTL = int(os.getenv('RESULT_CACHE_TTL', '3600'))
MAX_CACHED_RESULTS = int(os.getenv('MAX_CACHED_RESULTS', '500'))
