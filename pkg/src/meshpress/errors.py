"""Exception types shared across the meshpress package."""


class MeshpressError(Exception):
    """Base class for all meshpress errors."""


class BadImage(MeshpressError):
    """Input is not a decodable 8-bit PNG, or has an illegal geometry."""


class ImageTooLarge(BadImage):
    """Image exceeds the 4096-pixel cap on either dimension."""


class BadConfig(MeshpressError):
    """A pipeline configuration value violates its invariants."""


class WrongMode(MeshpressError):
    """A stencil set arrived in a mode the operation does not accept."""


class StencilTooWide(MeshpressError):
    """Packed row width would not fit the raster frame header."""


class TextTooLong(MeshpressError):
    """Error code does not fit the requested stencil geometry."""


class StylizerError(MeshpressError):
    """The stylizer endpoint failed its contract (status, timeout, or size)."""


class DeviceWriteError(MeshpressError):
    """Writing a raster frame to the printer device failed. Retryable."""


class NotReady(MeshpressError):
    """Print requested for a job that has no printable artifacts yet."""
