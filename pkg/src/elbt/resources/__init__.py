"""Access to the shipped SUT programs and input-generation spec files."""

from __future__ import annotations

from importlib import resources


def read_text(name: str) -> str:
    return (resources.files(__package__) / name).read_text(encoding="utf-8")


def load_sut(name: str):
    """Parse a shipped program, e.g. load_sut('triangle')."""
    from elbt.lang import parse

    return parse(read_text(f"{name}.sut"))


def load_spec(name: str):
    """Parse a shipped input spec, e.g. load_spec('find_middle')."""
    from elbt.specgen import parse_spec

    return parse_spec(read_text(f"{name}.spec"))
