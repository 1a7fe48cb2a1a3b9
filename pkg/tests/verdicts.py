"""Shared store for acceptance verdicts (printed by the conftest summary hook)."""

VERDICTS = {}


def record(number, passed, detail):
    VERDICTS[number] = (bool(passed), detail)
    print(f"criterion {number}: {'PASS' if passed else 'FAIL'} ({detail})")
