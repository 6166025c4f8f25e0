"""Shared pytest plumbing."""

_config = None


def pytest_configure(config):
    global _config
    _config = config


def show(line: str) -> None:
    """Put a line into the live terminal output, bypassing output capture."""
    reporter = None
    if _config is not None:
        reporter = _config.pluginmanager.get_plugin("terminalreporter")
    if reporter is not None:
        reporter.write_line(line)
