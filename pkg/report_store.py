"""
SQLAlchemy ledger of verify runs. One `verify_runs` row per suite run and
one `check_results` row per check.
"""

import enum
import logging

from sqlalchemy import (
    TIMESTAMP,
    Boolean,
    Column,
    Enum,
    Float,
    ForeignKey,
    Integer,
    String,
    create_engine,
    func,
)
from sqlalchemy.orm import declarative_base, relationship, sessionmaker

logger = logging.getLogger(__name__)

Base = declarative_base()


class RunOutcome(enum.Enum):
    Passed = "Passed"
    Failed = "Failed"


class VerifyRun(Base):
    __tablename__ = "verify_runs"
    run_id = Column(Integer, primary_key=True, autoincrement=True)
    command = Column(String(500), nullable=False)
    input_digest = Column(String(64), nullable=False)
    suite = Column(String(50), nullable=False)
    seed = Column(Integer, nullable=False)
    trials = Column(Integer, nullable=False)
    outcome = Column(Enum(RunOutcome), nullable=False)
    wall_time = Column(Float, nullable=False)
    created_at = Column(TIMESTAMP, server_default=func.now())

    checks = relationship("CheckRecord", back_populates="run", cascade="all, delete-orphan")


class CheckRecord(Base):
    __tablename__ = "check_results"
    check_id = Column(Integer, primary_key=True, autoincrement=True)
    run_id = Column(Integer, ForeignKey("verify_runs.run_id"), nullable=False)
    name = Column(String(100), nullable=False)
    measured = Column(Float)
    tolerance = Column(Float, nullable=False)
    at_most = Column(Boolean, nullable=False, default=True)
    passed = Column(Boolean, nullable=False)
    samples = Column(Integer, nullable=False, default=0)
    skipped = Column(Integer, nullable=False, default=0)
    worst_seed = Column(Integer)
    worst_trial = Column(Integer)
    worst_k = Column(Float)

    run = relationship("VerifyRun", back_populates="checks")


def make_session_factory(database_url):
    engine = create_engine(database_url)
    create_tables(engine)
    return sessionmaker(bind=engine)


def create_tables(engine):
    Base.metadata.create_all(engine)


def _finite_or_none(value):
    return None if value != value else value


def add_run(session_factory, command, input_digest, suite_result):
    """Store one SuiteResult; returns the new run_id."""
    session = session_factory()
    try:
        run = VerifyRun(
            command=command,
            input_digest=input_digest,
            suite=suite_result.name,
            seed=suite_result.seed,
            trials=suite_result.trials,
            outcome=RunOutcome.Passed if suite_result.passed else RunOutcome.Failed,
            wall_time=suite_result.wall_time,
        )
        for check in suite_result.checks:
            run.checks.append(CheckRecord(
                name=check.name,
                measured=_finite_or_none(check.measured),
                tolerance=check.tolerance,
                at_most=check.at_most,
                passed=check.passed,
                samples=check.samples,
                skipped=check.skipped,
                worst_seed=check.worst_seed,
                worst_trial=check.worst_trial,
                worst_k=check.worst_k,
            ))
        session.add(run)
        session.commit()
        logger.info(f"stored verify run {run.run_id} ({suite_result.name})")
        return run.run_id
    except Exception as e:
        session.rollback()
        logger.error(f"Error storing verify run: {e}")
        raise
    finally:
        session.close()


def get_run_history(session_factory, limit=20):
    """Newest runs first, each as a dict with its checks."""
    session = session_factory()
    try:
        runs = (
            session.query(VerifyRun)
            .order_by(VerifyRun.run_id.desc())
            .limit(limit)
            .all()
        )
        return [
            {
                "run_id": r.run_id,
                "command": r.command,
                "input_digest": r.input_digest,
                "suite": r.suite,
                "seed": r.seed,
                "trials": r.trials,
                "outcome": r.outcome.value,
                "wall_time": r.wall_time,
                "created_at": r.created_at.strftime("%Y-%m-%d %H:%M:%S") if r.created_at else None,
                "checks": [
                    {
                        "name": c.name,
                        "measured": c.measured,
                        "tolerance": c.tolerance,
                        "passed": c.passed,
                        "worst_trial": c.worst_trial,
                        "worst_k": c.worst_k,
                    }
                    for c in r.checks
                ],
            }
            for r in runs
        ]
    finally:
        session.close()
