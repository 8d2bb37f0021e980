import pytest

from elbt.resources import load_spec, load_sut

_ACCEPTANCE_LINES: list[str] = []


def record_criterion(number: int, description: str, passed: bool, note: str = "") -> None:
    status = "PASS" if passed else "FAIL"
    line = f"[{status}] criterion {number}: {description}"
    if note:
        line += f" ({note})"
    _ACCEPTANCE_LINES.append(line)
    print(line)


@pytest.fixture(scope="session")
def criterion():
    return record_criterion


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def triangle_sut():
    return load_sut("triangle")


@pytest.fixture(scope="session")
def triangle_spec():
    return load_spec("triangle")


@pytest.fixture(scope="session")
def find_middle_sut():
    return load_sut("find_middle")


@pytest.fixture(scope="session")
def find_middle_spec():
    return load_spec("find_middle")


def triangle_reference(x: int, y: int, z: int) -> str:
    """Host-language oracle for the triangle classifier."""
    if x < 1 or y < 1 or z < 1:
        return "invalid"
    if x + y <= z or x + z <= y or y + z <= x:
        return "invalid"
    if x == y == z:
        return "equilateral"
    if x == y or y == z or x == z:
        return "isosceles"
    return "scalene"


def find_middle_reference(x: int, y: int, z: int) -> int:
    """Host-language oracle: sort and take the middle."""
    return sorted((x, y, z))[1]
