from sqlalchemy import Column, DateTime, Float, Integer, LargeBinary, String
from sqlalchemy.sql import func

from .database import Base


class SpectrumRecord(Base):
    __tablename__ = "spectra"

    key = Column(String(64), primary_key=True, index=True)
    weight = Column(String, nullable=False, index=True)
    symbol = Column(String, nullable=False, index=True)
    size = Column(Integer, nullable=False)
    basis = Column(String(16), nullable=False)
    singular_values = Column(LargeBinary, nullable=False)  # float64, 降序
    residual = Column(Float, nullable=False)
    createdAt = Column(DateTime(timezone=True), server_default=func.now(), nullable=False)
