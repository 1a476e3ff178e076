"""Class/attribute name to table/column name conventions."""
from __future__ import annotations

import enum
import re

_BOUNDARY = re.compile(r"(?<=[a-z])(?=[A-Z])")


class NamingConvention(enum.Enum):
    UPPER_SNAKE = "upper_snake"
    AS_IS = "as_is"
    LOWER_SNAKE = "lower_snake"

    def apply(self, name: str) -> str:
        if self is NamingConvention.AS_IS:
            return name
        snake = _BOUNDARY.sub("_", name)
        return snake.upper() if self is NamingConvention.UPPER_SNAKE else snake.lower()


def to_table_name(class_name: str, convention: NamingConvention = NamingConvention.UPPER_SNAKE) -> str:
    return convention.apply(class_name)


def to_column_name(attr_name: str, convention: NamingConvention = NamingConvention.UPPER_SNAKE) -> str:
    return convention.apply(attr_name)
