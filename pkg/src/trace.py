"""
Trace
=====
Append-only record of a run: round markers, delivered acts, knowledge
writes, environment changes, action log entries and protocol events. One
canonical JSON object per line; the digest is SHA-256 over the lines.
"""

import hashlib
import logging
from pathlib import Path
from typing import Iterable, Iterator, List, Union

from pydantic import TypeAdapter, ValidationError

from src.errors import ParseError
from src.schemas.trace import ProtocolEvent, TraceRecord

logger = logging.getLogger(__name__)

_RECORD = TypeAdapter(TraceRecord)


class Trace:
    def __init__(self, records: Iterable = ()):
        self.records: List = []
        for record in records:
            self.append(record)

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self) -> Iterator:
        return iter(self.records)

    def __eq__(self, other) -> bool:
        return isinstance(other, Trace) and self.lines() == other.lines()

    @property
    def last_round(self) -> int:
        return self.records[-1].round if self.records else 0

    def append(self, record) -> None:
        if self.records and record.round < self.last_round:
            raise ValueError(f"trace record for round {record.round} after round {self.last_round}")
        self.records.append(record)

    def extend(self, records: Iterable) -> None:
        for record in records:
            self.append(record)

    def lines(self) -> List[str]:
        return [record.model_dump_json() for record in self.records]

    def digest(self) -> str:
        return trace_digest(self)

    def flagged(self) -> List[ProtocolEvent]:
        return [r for r in self.records if isinstance(r, ProtocolEvent) and r.flagged]

    def write(self, path: Union[str, Path]) -> None:
        Path(path).write_text("".join(line + "\n" for line in self.lines()), encoding="utf-8")
        logger.info(f"[Trace] Wrote {len(self.records)} records to {path}")

    @classmethod
    def load(cls, path: Union[str, Path]) -> "Trace":
        trace = cls()
        text = Path(path).read_text(encoding="utf-8")
        for number, line in enumerate(text.splitlines(), start=1):
            if not line.strip():
                continue
            try:
                trace.append(_RECORD.validate_json(line))
            except ValidationError as e:
                raise ParseError(f"bad trace record: {e.errors()[0]['msg']}", line=number, path=str(path)) from e
            except ValueError as e:
                raise ParseError(str(e), line=number, path=str(path)) from e
        return trace


def trace_digest(trace: Trace) -> str:
    """Hex SHA-256 of the canonical serialization."""
    return hashlib.sha256("\n".join(trace.lines()).encode("utf-8")).hexdigest()
