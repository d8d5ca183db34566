"""Exception hierarchy shared across the package.

Exit-code mapping used by the CLI lives here so the service and the CLI
agree on it: 2 = configuration, 3 = I/O, 4 = numerical blowup.
"""

from __future__ import annotations


class WavegatesError(Exception):
    """Base class for all package errors."""

    exit_code = 1


class ConfigError(WavegatesError):
    """Invalid scenario configuration, geometry spec or parameter set."""

    exit_code = 2


class ArtifactIOError(WavegatesError):
    """Failure reading or writing simulation artifacts."""

    exit_code = 3


class ImageDecodeError(ArtifactIOError):
    """Base class for raster-input failures."""


class UnreadableFileError(ImageDecodeError):
    """The path does not exist or cannot be opened."""


class UnsupportedFormatError(ImageDecodeError):
    """The file exists but is not a raster format we decode."""


class CorruptImageError(ImageDecodeError):
    """The file matched a known format but its contents do not parse."""


class UndefinedActivityError(WavegatesError):
    """Activity fraction requested on a grid with no conductive nodes."""


class NumericalBlowupError(WavegatesError):
    """Integration produced a non-finite or runaway value."""

    exit_code = 4

    def __init__(self, iteration: int, node: tuple[int, int], value: float):
        self.iteration = iteration
        self.node = node
        self.value = value
        super().__init__(
            f"numerical blowup at iteration {iteration}, node (x={node[0]}, y={node[1]}): u/v={value!r}"
        )
