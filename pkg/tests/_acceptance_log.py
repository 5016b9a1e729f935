"""Outcome lines collected by the acceptance suite, printed at session end."""

from contextlib import contextmanager

RESULTS = []


@contextmanager
def criterion(number, title):
    info = {"detail": ""}
    try:
        yield info
    except BaseException:
        RESULTS.append((number, title, False, info["detail"]))
        raise
    RESULTS.append((number, title, True, info["detail"]))
