"""The closed element taxonomy: five basic kinds, four auxiliary kinds."""

from __future__ import annotations

from enum import Enum


class ElementKind(Enum):
    TEXT = "Text"
    FIGURE = "Figure"
    TABLE = "Table"
    EQUATION = "Equation"
    CODE_BLOCK = "CodeBlock"
    TEACHER_IMAGE = "TeacherImage"
    SUBTITLE = "Subtitle"
    TEST = "Test"
    EXAMPLE = "Example"

    @property
    def is_basic(self) -> bool:
        return self in _BASIC

    @property
    def is_auxiliary(self) -> bool:
        return self not in _BASIC


_BASIC = frozenset({
    ElementKind.TEXT,
    ElementKind.FIGURE,
    ElementKind.TABLE,
    ElementKind.EQUATION,
    ElementKind.CODE_BLOCK,
})

KIND_NAMES = frozenset(kind.value for kind in ElementKind)
