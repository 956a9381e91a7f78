"""
OrbitMu 版本管理

此文件定义了项目的版本号和变更历史。
版本号遵循语义化版本规范 (SemVer): https://semver.org/
"""

__version__ = "0.3.0"
__author__ = "OrbitMu Team"
__license__ = "MIT"

VERSION_HISTORY = """
# OrbitMu 版本历史

## v0.3.0 - 服务化

### 新增
- FastAPI 服务：/api/v1/check、/solve-game、/bisim、/freshpath、/translate-ltl、/orbits
- 结果缓存（内存 / Redis）
- selftest 验收矩阵（fixtures/matrix.yaml）

---

## v0.2.0 - 博弈与互模拟

### 新增
- 原子奇偶博弈的轨道商与 Zielonka 求解
- 求值博弈与充分性校验
- k-互模拟与 k-栈互模拟博弈
- #Path 判定（K̂ 构造、余有限预过滤、有界搜索）
- 图灵机 -> LTL -> μ-演算归约

---

## v0.1.0 - 初始版

### 新增功能
- 等式原子与序原子上的完全类型与约束
- 轨道有限集合与关系
- 原子 Kripke 模型 DSL 与内置模型
- 标量 / 向量原子 μ-演算的语法与模型检测
"""

def get_version():
    """获取当前版本号"""
    return __version__

def get_version_info():
    """获取版本信息字典"""
    return {
        "version": __version__,
        "author": __author__,
        "license": __license__
    }
