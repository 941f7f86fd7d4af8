"""Design and spectroscopy toolkit for 3D lumped-element microwave
cavities coupled to NV electron-spin ensembles."""

__version__ = "0.1.0"

from . import circuit, constants, coupling, errors, fieldmap, nvspin, spectroscopy  # noqa: F401
