"""
OrbitMu 应用包

轨道有限集合引擎与原子 μ-演算工具集。
"""

from app.version import __version__, get_version, get_version_info

__all__ = ['__version__', 'get_version', 'get_version_info']
