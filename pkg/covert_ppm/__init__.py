"""covert-ppm: finite-blocklength covert communication over binary-input DMCs.

Exact divergences and hypothesis tests, PPM input laws, random coding certificates,
second-order planners and warden-side converse bounds, plus the experiment runners
behind the covert-ppm command.
"""


def _get_version() -> str:
    """Version from installed package metadata, else from pyproject.toml."""
    try:
        from importlib.metadata import PackageNotFoundError, version

        try:
            return version("covert-ppm")
        except PackageNotFoundError:
            pass
    except ImportError:
        pass

    import re
    from pathlib import Path

    pyproject_path = Path(__file__).parent.parent / "pyproject.toml"
    if pyproject_path.exists():
        try:
            content = pyproject_path.read_text(encoding="utf-8")
            match = re.search(r'version\s*=\s*"([^"]+)"', content)
            if match:
                return match.group(1)
        except OSError:
            pass

    return "0.1.0"


__version__ = _get_version()
