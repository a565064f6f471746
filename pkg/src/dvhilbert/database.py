import threading
from contextlib import contextmanager
from typing import Iterator, Optional

from sqlalchemy import create_engine
from sqlalchemy.engine import Engine
from sqlalchemy.orm import Session, declarative_base, sessionmaker
from sqlalchemy.pool import StaticPool

from .config import get_settings

# 创建基础模型类
Base = declarative_base()

_lock = threading.Lock()
_configured = False
_engine: Optional[Engine] = None
SessionLocal: Optional[sessionmaker] = None


def _make_engine(url: str) -> Engine:
    kwargs = {}
    if url.startswith("sqlite"):
        kwargs["connect_args"] = {"check_same_thread": False}
        if url in ("sqlite://", "sqlite:///:memory:"):
            # 共享单个连接, 所有线程看到同一个内存数据库
            kwargs["poolclass"] = StaticPool
    return create_engine(url, **kwargs)


def configure(url: Optional[str] = None) -> Optional[Engine]:
    """(重新) 绑定会话工厂; URL 为空时禁用缓存"""
    global _configured, _engine, SessionLocal
    url = get_settings().cache_url if url is None else url
    with _lock:
        if _engine is not None:
            _engine.dispose()
        _configured = True
        if not url:
            _engine, SessionLocal = None, None
            return None
        _engine = _make_engine(url)
        from . import models  # noqa: F401  在 Base 上注册表

        Base.metadata.create_all(bind=_engine)
        SessionLocal = sessionmaker(autocommit=False, autoflush=False, bind=_engine)
        return _engine


def cache_enabled() -> bool:
    if not _configured:
        configure()
    return SessionLocal is not None


# 数据库依赖
@contextmanager
def get_db() -> Iterator[Session]:
    if not cache_enabled():
        raise RuntimeError("spectrum cache is disabled")
    db = SessionLocal()
    try:
        yield db
    finally:
        db.close()
