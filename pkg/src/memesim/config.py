"""INI-style run configuration shared by the CLI subcommands.

Sections are named after subcommands (``[generate.sccp]``, ``[generate.er]``,
``[analyze]``, ``[simulate]``, ``[validate]``) plus ``[global]`` for keys every
subcommand may read (``seed``, ``jobs``). Keys mirror the long CLI flags with
dashes replaced by underscores; command-line flags always win.
"""
from __future__ import annotations

import configparser
import os

from .errors import ParseError


class RunConfig:
    def __init__(self, parser: configparser.ConfigParser | None = None, path=None):
        self._cp = parser or configparser.ConfigParser()
        self.path = path

    @classmethod
    def load(cls, path) -> "RunConfig":
        cp = configparser.ConfigParser()
        try:
            with open(path, encoding="utf-8") as fh:
                cp.read_file(fh)
        except configparser.Error as exc:
            raise ParseError(f"bad config file {os.fspath(path)}: {exc}") from None
        return cls(cp, path)

    def get(self, section: str, key: str, cast=str, default=None):
        for sec in (section, "global"):
            if self._cp.has_option(sec, key):
                raw = self._cp.get(sec, key)
                try:
                    return cast(raw)
                except ValueError:
                    raise ParseError(f"config [{sec}] {key} = {raw!r} is not valid") from None
        return default

    def merged(self, section: str, args, spec: dict) -> dict:
        """Resolve each ``name -> (cast, default)`` from flags, then config, then default."""
        out = {}
        for name, (cast, default) in spec.items():
            val = getattr(args, name, None)
            if val is None:
                val = self.get(section, name, cast, default)
            out[name] = val
        return out


def int_list(text: str) -> list[int]:
    return [int(x) for x in str(text).replace(",", " ").split()]


def float_list(text: str) -> list[float]:
    return [float(x) for x in str(text).replace(",", " ").split()]


def boolean(text) -> bool:
    if isinstance(text, bool):
        return text
    t = str(text).strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(text)
