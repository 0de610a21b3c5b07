"""lecturemap: build and serve concept-based augmentation manifests for
lecture videos.

The pipeline turns a course's frames, transcript, and element annotations
into a single versioned manifest of highlights, glyph layouts, radial
concept views, and an interaction state machine, served read-only over HTTP
to an interactive player.
"""

from ._accel import BACKEND as kernel_backend

__version__ = "0.1.0"
__all__ = ["kernel_backend", "__version__"]
