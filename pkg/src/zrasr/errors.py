"""Exception types shared across the package."""


class ZrasrError(ValueError):
    """Bad input data: malformed files, unknown symbols, inconsistent configs.

    The CLI maps this to exit code 2.
    """


class UnknownPhonemeError(ZrasrError):
    pass


class FormatError(ZrasrError):
    """A file failed to parse. ``line`` is 1-based when known."""

    def __init__(self, message, path=None, line=None):
        where = ""
        if path is not None:
            where += f"{path}"
        if line is not None:
            where += f":{line}" if where else f"line {line}"
        super().__init__(f"{where}: {message}" if where else message)
        self.path = path
        self.line = line
