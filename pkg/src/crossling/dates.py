"""Calendar arithmetic for cutoff windows and temporal filtering.

All dates are timezone-free calendar dates; month arithmetic clamps to the
last day of the target month when the source day does not exist there
(2024-08-31 + 6 months -> 2025-02-28).
"""

from __future__ import annotations

import calendar
import datetime as dt
import re

from .errors import ValidationError

_MONTH_ONLY = re.compile(r"^(\d{4})-(\d{2})$")


def parse_date(value: str | dt.date, field: str = "date") -> dt.date:
    """Parse an ISO date; a month-only value normalizes to its first day."""
    if isinstance(value, dt.datetime):
        return value.date()
    if isinstance(value, dt.date):
        return value
    if not isinstance(value, str):
        raise ValidationError(field, f"expected a date, got {type(value).__name__}")
    m = _MONTH_ONLY.match(value.strip())
    if m:
        year, month = int(m.group(1)), int(m.group(2))
        if not 1 <= month <= 12:
            raise ValidationError(field, f"month out of range in {value!r}")
        return dt.date(year, month, 1)
    try:
        return dt.date.fromisoformat(value.strip())
    except ValueError as exc:
        raise ValidationError(field, f"unparseable date {value!r}") from exc


def add_months(day: dt.date, months: int) -> dt.date:
    """Advance by calendar months, clamping to the end of the target month."""
    index = day.year * 12 + (day.month - 1) + months
    year, month = divmod(index, 12)
    month += 1
    last = calendar.monthrange(year, month)[1]
    return dt.date(year, month, min(day.day, last))


def window_start(cutoff: dt.date, window_months: int) -> dt.date:
    """Earliest admissible occurrence date: cutoff advanced by the window."""
    return add_months(cutoff, window_months)
